#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ineq/error.hpp"
#include "ineq/format.hpp"
#include "ineq/model.hpp"
#include "ineq/parallel.hpp"

namespace ineq {

struct DescStats {
  std::size_t n = 0;
  double mean = 0.0;
  double std_dev = 0.0;
  double median = 0.0;
  std::optional<double> cv_percent;           // undefined when mean == 0
  std::optional<double> mean_over_median;     // undefined when median == 0
  std::optional<double> ratio_top_bottom_10;  // undefined when bottom sum == 0
  std::optional<double> ratio_top_bottom_1;
};

namespace detail {

inline void check_series(std::span<const double> series) {
  if (series.empty()) throw Error(ErrorCode::EmptySeries, "series is empty");
}

inline std::size_t tail_count(std::size_t n, double q) {
  const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(n) / 100.0));
  return std::max<std::size_t>(1, k);
}

inline double sum_range(const double* first, const double* last) {
  CompensatedSum s;
  for (; first != last; ++first) s.add(*first);
  return s.value();
}

// Sum of the k smallest and k largest values. Reorders `values`.
inline std::pair<double, double> tail_sums(std::vector<double>& values, std::size_t k) {
  const std::size_t n = values.size();
  k = std::min(k, n);
  double* data = values.data();
  if (k < n) std::nth_element(data, data + k, data + n);
  const double bottom = sum_range(data, data + k);
  if (n - k > k) std::nth_element(data + k, data + (n - k), data + n);
  const double top = sum_range(data + (n - k), data + n);
  return {bottom, top};
}

inline std::optional<double> ratio_of(double top, double bottom) {
  if (bottom <= 0.0) return std::nullopt;
  return top / bottom;
}

}  // namespace detail

/// Ratio of the sum of the k largest to the sum of the k smallest values,
/// k = max(1, floor(q n / 100)). nullopt when the bottom sum is zero.
inline std::optional<double> top_bottom_ratio(std::span<const double> series, double q) {
  detail::check_series(series);
  if (!(q > 0.0 && q <= 50.0)) throw Error(ErrorCode::ArgumentError, "q must be in (0, 50]");
  std::vector<double> copy(series.begin(), series.end());
  const auto [bottom, top] = detail::tail_sums(copy, detail::tail_count(copy.size(), q));
  return detail::ratio_of(top, bottom);
}

inline DescStats descriptive_stats(std::span<const double> series, const Exec& exec = {}) {
  detail::check_series(series);
  const std::size_t n = series.size();
  DescStats s;
  s.n = n;

  for_each_chunk(n, exec, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      if (!(series[i] >= 0.0) || !std::isfinite(series[i]))
        throw Error(ErrorCode::NegativeIncome, "series value at " + std::to_string(i) +
                                                   " is negative or not finite");
  });
  s.mean = reduce_sum(n, exec, [&](std::size_t i) { return series[i]; }) / static_cast<double>(n);
  if (n > 1) {
    const double ss = reduce_sum(n, exec, [&](std::size_t i) {
      const double d = series[i] - s.mean;
      return d * d;
    });
    s.std_dev = std::sqrt(ss / static_cast<double>(n - 1));
  }

  std::vector<double> work(series.begin(), series.end());
  double* data = work.data();
  const std::size_t mid = n / 2;
  std::nth_element(data, data + mid, data + n);
  const double upper = data[mid];
  s.median = (n % 2 == 1) ? upper : 0.5 * (*std::max_element(data, data + mid) + upper);

  if (s.mean > 0.0) s.cv_percent = 100.0 * s.std_dev / s.mean;
  if (s.median > 0.0) s.mean_over_median = s.mean / s.median;

  for (double q : {10.0, 1.0}) {
    const auto [bottom, top] = detail::tail_sums(work, detail::tail_count(n, q));
    (q == 10.0 ? s.ratio_top_bottom_10 : s.ratio_top_bottom_1) = detail::ratio_of(top, bottom);
  }
  return s;
}

struct Histogram {
  std::vector<double> bin_edges;  // counts.size() + 1 ascending edges
  std::vector<std::size_t> counts;
  std::size_t underflow = 0;
  std::size_t overflow = 0;

  std::size_t total() const noexcept {
    std::size_t t = underflow + overflow;
    for (auto c : counts) t += c;
    return t;
  }
};

/// Half-open bins [lo + i w, lo + (i+1) w); the last bin ends at hi.
inline Histogram histogram(std::span<const double> series, double bin_width, double lo, double hi) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width))
    throw Error(ErrorCode::ArgumentError, "bin width must be positive");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw Error(ErrorCode::ArgumentError, "range must satisfy lo < hi");
  const double span_bins = std::ceil((hi - lo) / bin_width);
  if (span_bins > 1e8) throw Error(ErrorCode::ArgumentError, "too many bins");
  const auto bins = std::max<std::size_t>(1, static_cast<std::size_t>(span_bins));

  Histogram h;
  h.counts.assign(bins, 0);
  h.bin_edges.reserve(bins + 1);
  for (std::size_t i = 0; i < bins; ++i) h.bin_edges.push_back(lo + static_cast<double>(i) * bin_width);
  h.bin_edges.push_back(hi);

  for (double v : series) {
    if (v < lo) {
      ++h.underflow;
    } else if (v >= hi) {
      ++h.overflow;
    } else {
      auto idx = static_cast<std::size_t>(std::floor((v - lo) / bin_width));
      h.counts[std::min(idx, bins - 1)]++;
    }
  }
  return h;
}

inline void write_csv(std::ostream& os, const Histogram& h) {
  os << "bin,lo,hi,count\n";
  os << "underflow,," << fmt_double(h.bin_edges.front()) << ',' << h.underflow << '\n';
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    os << i << ',' << fmt_double(h.bin_edges[i]) << ',' << fmt_double(h.bin_edges[i + 1]) << ','
       << h.counts[i] << '\n';
  os << "overflow," << fmt_double(h.bin_edges.back()) << ",," << h.overflow << '\n';
}

struct GroupSummaryRow {
  GroupId id;
  std::string label;
  std::size_t n = 0;
  double population_share = 0.0;
  double income_share = 0.0;
  double mean = 0.0;
};

struct GroupSummary {
  std::vector<GroupSummaryRow> rows;
};

inline GroupSummary group_summary(const GroupPartition& partition,
                                  std::span<const std::string> source_labels) {
  GroupSummary out;
  for (const auto& g : partition.groups) {
    out.rows.push_back(GroupSummaryRow{
        g.id, g.id.label(source_labels), g.n,
        static_cast<double>(g.n) / static_cast<double>(partition.n),
        partition.total > 0.0 ? g.total / partition.total : 0.0, g.mean});
  }
  return out;
}

inline void write_csv(std::ostream& os, const GroupSummary& s) {
  os << "group,n,population_share,income_share,mean\n";
  for (const auto& r : s.rows)
    os << r.label << ',' << r.n << ',' << fmt_double(r.population_share) << ','
       << fmt_double(r.income_share) << ',' << fmt_double(r.mean) << '\n';
}

}  // namespace ineq
