#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace ineq {

/// Shortest decimal text that parses back to the same double.
inline std::string fmt_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

/// Appends fmt_double(v) to out without a temporary.
inline void append_double(std::string& out, double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ec == std::errc{} ? end : buf);
}

}  // namespace ineq
