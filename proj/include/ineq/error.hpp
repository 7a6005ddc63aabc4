#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ineq {

enum class ErrorCode {
  EmptySeries,
  NegativeIncome,
  ZeroMean,
  AllZero,
  Malformed,
  DegenerateSource,
  ArgumentError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::NegativeIncome: return "NegativeIncome";
    case ErrorCode::ZeroMean: return "ZeroMean";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::Malformed: return "Malformed";
    case ErrorCode::DegenerateSource: return "DegenerateSource";
    case ErrorCode::ArgumentError: return "ArgumentError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every library failure carries a machine-readable code; the CLI maps
/// them all to exit status 1.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Ingest failure tied to a 1-based line of the input file (header is line 1).
class RowError : public Error {
public:
  RowError(ErrorCode code, std::size_t line, const std::string& what)
      : Error(code, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

}  // namespace ineq
