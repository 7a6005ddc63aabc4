#pragma once

// CSV ingestion: `person_id,<source labels...>` header, comma separated,
// '.' decimal point, empty cell = 0.

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "ineq/error.hpp"
#include "ineq/model.hpp"

namespace ineq {

enum class OnError { reject_row, abort };

struct ValidationPolicy {
  OnError on_negative = OnError::abort;
  OnError on_all_zero = OnError::reject_row;
  OnError on_malformed = OnError::abort;

  OnError action_for(ErrorCode code) const noexcept {
    switch (code) {
      case ErrorCode::NegativeIncome: return on_negative;
      case ErrorCode::AllZero: return on_all_zero;
      default: return on_malformed;
    }
  }
};

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t rows_accepted = 0;
  std::size_t rows_rejected = 0;
  std::map<ErrorCode, std::size_t> reject_reasons;

  void merge(const IngestReport& other) {
    rows_read += other.rows_read;
    rows_accepted += other.rows_accepted;
    rows_rejected += other.rows_rejected;
    for (const auto& [code, count] : other.reject_reasons) reject_reasons[code] += count;
  }
};

struct RowFault {
  ErrorCode reason = ErrorCode::Malformed;
  std::string message;
};

namespace detail {

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Parses one data row into `out` (size m). Returns the fault, if any.
// Malformed cells win over negative amounts, which win over all-zero rows.
inline std::optional<RowFault> parse_fields(std::string_view line, std::span<double> out,
                                            std::string_view& person_id) {
  const std::size_t m = out.size();
  std::size_t pos = line.find(',');
  if (pos == std::string_view::npos)
    return RowFault{ErrorCode::Malformed, "expected " + std::to_string(m + 1) + " columns, got 1"};
  person_id = trim(line.substr(0, pos));

  bool negative = false;
  bool any_positive = false;
  std::size_t k = 0;
  while (pos != std::string_view::npos) {
    const std::size_t start = pos + 1;
    pos = line.find(',', start);
    const std::string_view cell =
        trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (k == m)
      return RowFault{ErrorCode::Malformed, "expected " + std::to_string(m + 1) + " columns, got more"};
    double v = 0.0;
    if (!cell.empty()) {
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || end != cell.data() + cell.size() || !std::isfinite(v))
        return RowFault{ErrorCode::Malformed, "column " + std::to_string(k + 2) + ": '" +
                                                  std::string(cell) + "' is not a number"};
    }
    negative = negative || v < 0.0;
    any_positive = any_positive || v > 0.0;
    out[k++] = v;
  }
  if (k != m)
    return RowFault{ErrorCode::Malformed,
                    "expected " + std::to_string(m + 1) + " columns, got " + std::to_string(k + 1)};
  if (negative) return RowFault{ErrorCode::NegativeIncome, "negative amount"};
  if (!any_positive) return RowFault{ErrorCode::AllZero, "all amounts are zero"};
  return std::nullopt;
}

inline std::vector<std::string> parse_header(std::string_view line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    cols.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                             : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (!cols.empty() && cols.front().starts_with("\xEF\xBB\xBF")) cols.front().erase(0, 3);
  if (cols.size() < 2) throw RowError(ErrorCode::Malformed, 1, "header needs person_id and at least one source");
  for (const auto& c : cols)
    if (c.empty()) throw RowError(ErrorCode::Malformed, 1, "empty header column");
  return std::vector<std::string>(cols.begin() + 1, cols.end());
}

}  // namespace detail

/// Parses one data row of an m-source table.
inline std::variant<IncomeRecord, RowFault> parse_row(std::string_view line, std::size_t m) {
  IncomeRecord r;
  r.amounts.assign(m, 0.0);
  std::string_view id;
  if (auto fault = detail::parse_fields(line, r.amounts, id)) return *std::move(fault);
  r.person_id = std::string(id);
  return r;
}

struct LoadResult {
  Population population;
  IngestReport report;
};

/// Reads a header row and then data rows. Rows are kept in file order.
/// Faults follow `policy`: rejected rows are counted, aborting faults throw
/// RowError naming the 1-based file line.
inline LoadResult load_population(std::istream& in, const ValidationPolicy& policy = {}) {
  constexpr std::size_t kBlock = std::size_t{1} << 22;
  std::string buffer;
  std::vector<char> block(kBlock);
  std::size_t line_no = 0;
  std::optional<LoadResult> result;
  std::vector<double> amounts;

  auto handle_line = [&](std::string_view line) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!result) {
      result.emplace(LoadResult{Population(detail::parse_header(line)), {}});
      amounts.assign(result->population.sources(), 0.0);
      return;
    }
    if (detail::trim(line).empty()) return;
    auto& report = result->report;
    ++report.rows_read;
    std::string_view id;
    if (auto fault = detail::parse_fields(line, amounts, id)) {
      if (policy.action_for(fault->reason) == OnError::abort)
        throw RowError(fault->reason, line_no, fault->message);
      ++report.rows_rejected;
      ++report.reject_reasons[fault->reason];
      return;
    }
    result->population.append_unchecked(id, amounts);
    ++report.rows_accepted;
  };

  for (;;) {
    in.read(block.data(), static_cast<std::streamsize>(block.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    buffer.append(block.data(), got);
    std::string_view view(buffer);
    std::size_t start = 0;
    for (std::size_t nl; (nl = view.find('\n', start)) != std::string_view::npos; start = nl + 1)
      handle_line(view.substr(start, nl - start));
    buffer.erase(0, start);
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read failure");
  if (!buffer.empty()) handle_line(buffer);
  if (!result) throw Error(ErrorCode::IoError, "input is empty (no header row)");
  return std::move(*result);
}

/// `path` of "-" reads standard input.
inline LoadResult load_population(const std::string& path, const ValidationPolicy& policy = {}) {
  if (path == "-") return load_population(std::cin, policy);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return load_population(in, policy);
}

}  // namespace ineq
