#pragma once

// Theil T index and its two decompositions:
//
//  * disjoint groups:   T = T_WI + T_BI
//  * overlapping income sources:  T = T_WG + T_BG + delta_cor
//
// Every total T is computed directly from pooled values and never as the sum
// of its terms, so the identities can be checked rather than assumed.

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ineq/error.hpp"
#include "ineq/model.hpp"
#include "ineq/parallel.hpp"

namespace ineq {

/// How the between-source term is reported.
///  literal: sum p_k ln p_k (nonpositive), residual computed term by term.
///  table4:  ln m + sum p_k ln p_k (maximum minus actual entropy, in
///           [0, ln m]); residual is whatever closes the identity.
enum class Convention { literal, table4 };

constexpr std::string_view to_string(Convention c) noexcept {
  return c == Convention::literal ? "literal" : "table4";
}

inline Convention parse_convention(std::string_view s) {
  if (s == "literal") return Convention::literal;
  if (s == "table4") return Convention::table4;
  throw Error(ErrorCode::ArgumentError, "unknown convention '" + std::string(s) + "'");
}

/// x ln x with 0 ln 0 = 0.
inline double xlogx(double x) noexcept { return x > 0.0 ? x * std::log(x) : 0.0; }

/// Per-person Theil term r ln r - r + 1 for r = v / mu. Summing these is
/// the Theil sum exactly when sum r = n, and every term is >= 0.
inline double theil_term(double r) noexcept { return xlogx(r) - r + 1.0; }

struct TheilResult {
  double value = 0.0;  // nats
  std::size_t n = 0;
  double mean = 0.0;
};

namespace detail {

// Theil index of value(i), i in [0, n): pass 1 totals, pass 2 entropy sum.
template <class Value>
TheilResult theil_of(std::size_t n, const Exec& exec, Value&& value) {
  if (n == 0) throw Error(ErrorCode::EmptySeries, "series is empty");
  struct Partial {
    CompensatedSum sum;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool bad = false;
  };
  const auto partials = map_chunks<Partial>(n, exec, [&](std::size_t b, std::size_t e) {
    Partial p;
    for (std::size_t i = b; i < e; ++i) {
      const double v = value(i);
      p.bad = p.bad || !(v >= 0.0) || !std::isfinite(v);
      p.sum.add(v);
      p.lo = std::min(p.lo, v);
      p.hi = std::max(p.hi, v);
    }
    return p;
  });
  CompensatedSum total;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : partials) {
    if (p.bad) throw Error(ErrorCode::NegativeIncome, "series contains a negative or non-finite value");
    total.merge(p.sum);
    lo = std::min(lo, p.lo);
    hi = std::max(hi, p.hi);
  }
  const double mean = total.value() / static_cast<double>(n);
  if (!(mean > 0.0)) throw Error(ErrorCode::ZeroMean, "series has zero mean");
  if (lo == hi) return TheilResult{0.0, n, mean};  // perfect equality

  const double s = reduce_sum(n, exec, [&](std::size_t i) { return theil_term(value(i) / mean); });
  return TheilResult{s / static_cast<double>(n), n, mean};
}

}  // namespace detail

inline TheilResult theil_index(std::span<const double> series, const Exec& exec = {}) {
  return detail::theil_of(series.size(), exec, [&](std::size_t i) { return series[i]; });
}

// ---------------------------------------------------------------------------
// Disjoint groups

struct GroupTerm {
  std::string label;
  std::optional<GroupId> id;
  std::size_t n = 0;
  double total = 0.0;
  double mean = 0.0;
  double weight_income = 0.0;  // VT_i / VT
  double weight_pop = 0.0;     // n_i / n
  double theil = 0.0;
  std::optional<double> share_percent;  // (VT_i/VT) T_i / T * 100; undefined if T == 0
};

struct GroupDecomposition {
  std::vector<GroupTerm> groups;
  std::size_t n = 0;
  double mean = 0.0;
  double theil = 0.0;  // T over the pooled series
  double t_wi = 0.0;
  double t_bi = 0.0;
  std::optional<double> within_percent;
  std::optional<double> between_percent;

  double identity_residual() const noexcept { return theil - (t_wi + t_bi); }
};

struct PercentSplit {
  double within = 0.0;
  double between = 0.0;
};

/// Within/between percentages of T from already-computed aggregates.
inline PercentSplit within_between_percent(double t_wi, double t_bi, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::ArgumentError, "total Theil must be positive");
  return PercentSplit{100.0 * t_wi / t, 100.0 * t_bi / t};
}

inline GroupDecomposition decompose_disjoint(std::span<const std::span<const double>> groups,
                                             std::span<const std::string> labels = {},
                                             const Exec& exec = {}) {
  if (groups.empty()) throw Error(ErrorCode::EmptySeries, "no groups");
  if (!labels.empty() && labels.size() != groups.size())
    throw Error(ErrorCode::ArgumentError, "label count does not match group count");

  GroupDecomposition out;
  CompensatedSum grand;
  std::vector<TheilResult> per_group;
  per_group.reserve(groups.size());
  for (const auto& g : groups) {
    if (g.empty()) throw Error(ErrorCode::EmptySeries, "group is empty");
    // A zero-mean group is allowed inside a positive-mean population.
    TheilResult r{0.0, g.size(), 0.0};
    CompensatedSum s;
    for (double v : g) s.add(v);
    if (s.value() > 0.0) {
      r = theil_index(g, exec);
    } else {
      for (double v : g)
        if (!(v >= 0.0)) throw Error(ErrorCode::NegativeIncome, "group contains a negative value");
    }
    grand.merge(s);
    out.n += g.size();
    per_group.push_back(r);
  }
  const double vt = grand.value();
  out.mean = vt / static_cast<double>(out.n);
  if (!(out.mean > 0.0)) throw Error(ErrorCode::ZeroMean, "pooled series has zero mean");

  // T over the pooled series, in group order.
  CompensatedSum pooled;
  for (const auto& g : groups) {
    const double mu = out.mean;
    pooled.add(reduce_sum(g.size(), exec, [&](std::size_t i) { return theil_term(g[i] / mu); }));
  }
  out.theil = pooled.value() / static_cast<double>(out.n);

  CompensatedSum wi, bi;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    GroupTerm t;
    t.label = labels.empty() ? std::to_string(i) : labels[i];
    t.n = groups[i].size();
    t.mean = per_group[i].mean;
    t.total = t.mean * static_cast<double>(t.n);
    t.weight_pop = static_cast<double>(t.n) / static_cast<double>(out.n);
    t.weight_income = t.mean / out.mean * t.weight_pop;
    t.theil = per_group[i].value;
    wi.add(t.weight_income * t.theil);
    // n_i/n * (mu_i/mu) ln(mu_i/mu), written with the nonnegative kernel;
    // the extra -r+1 terms cancel because sum n_i/n * mu_i/mu = 1.
    bi.add(t.weight_pop * theil_term(t.mean / out.mean));
    out.groups.push_back(std::move(t));
  }
  out.t_wi = wi.value();
  out.t_bi = bi.value();
  if (out.theil > 0.0) {
    for (auto& g : out.groups) g.share_percent = 100.0 * g.weight_income * g.theil / out.theil;
    const auto split = within_between_percent(out.t_wi, out.t_bi, out.theil);
    out.within_percent = split.within;
    out.between_percent = split.between;
  }
  return out;
}

inline GroupDecomposition decompose_disjoint(const std::vector<std::vector<double>>& groups,
                                             std::span<const std::string> labels = {},
                                             const Exec& exec = {}) {
  std::vector<std::span<const double>> views(groups.begin(), groups.end());
  return decompose_disjoint(views, labels, exec);
}

/// Decomposition of total income over the partition's source-pattern groups.
inline GroupDecomposition decompose_disjoint(const Population& population,
                                             const GroupPartition& partition,
                                             const Exec& exec = {}) {
  std::vector<std::vector<double>> series;
  std::vector<std::string> labels;
  for (const auto& g : partition.groups) {
    series.push_back(gather(population, g.members));
    labels.push_back(g.id.label(population.labels()));
  }
  auto out = decompose_disjoint(series, labels, exec);
  for (std::size_t i = 0; i < partition.groups.size(); ++i) out.groups[i].id = partition.groups[i].id;
  return out;
}

// ---------------------------------------------------------------------------
// Overlapping income sources

struct SourceTerm {
  std::string label;
  double mean = 0.0;   // mu_k
  double share = 0.0;  // p_k = mu_k / mu
  double theil = 0.0;  // T_k over the whole column, zeros included
};

struct SourceDecomposition {
  Convention convention = Convention::literal;
  std::vector<SourceTerm> sources;
  std::size_t n = 0;
  double mean = 0.0;
  double theil = 0.0;  // T over row totals
  double t_wg = 0.0;
  double t_bg = 0.0;
  double delta_cor = 0.0;
  /// -sum_jk (x_kj / VT) ln(x_kj / VT_j), evaluated term by term whatever
  /// the convention.
  double delta_cor_literal = 0.0;

  double identity_residual() const noexcept { return theil - (t_wg + t_bg + delta_cor); }
};

struct SourceTerms {
  double t_wg = 0.0;
  double t_bg = 0.0;
};

namespace detail {

inline double between_sources(std::span<const double> shares, Convention c) {
  CompensatedSum s;
  for (double p : shares) s.add(xlogx(p));
  const double entropy_gap = s.value();
  return c == Convention::literal ? entropy_gap
                                  : std::log(static_cast<double>(shares.size())) + entropy_gap;
}

// value(j, k) is the amount of source k for person j.
template <class Value>
SourceDecomposition decompose_sources_of(std::size_t n, std::size_t m, Convention convention,
                                         const Exec& exec, Value&& value) {
  if (n == 0) throw Error(ErrorCode::EmptySeries, "no rows");
  if (m < 2) throw Error(ErrorCode::ArgumentError, "need at least two sources");

  struct Totals {
    std::vector<CompensatedSum> cols;
    CompensatedSum rows;
    std::optional<ErrorCode> bad;
  };
  const auto pass1 = map_chunks<Totals>(n, exec, [&](std::size_t b, std::size_t e) {
    Totals t{std::vector<CompensatedSum>(m), {}, std::nullopt};
    for (std::size_t j = b; j < e; ++j) {
      double row = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double x = value(j, k);
        if (!(x >= 0.0) || !std::isfinite(x)) t.bad = ErrorCode::NegativeIncome;
        t.cols[k].add(x);
        row += x;
      }
      if (!(row > 0.0) && !t.bad) t.bad = ErrorCode::AllZero;
      t.rows.add(row);
    }
    return t;
  });
  std::vector<CompensatedSum> cols(m);
  CompensatedSum rows;
  for (const auto& t : pass1) {
    if (t.bad == ErrorCode::NegativeIncome)
      throw Error(ErrorCode::NegativeIncome, "matrix contains a negative or non-finite amount");
    if (t.bad) throw Error(ErrorCode::AllZero, "matrix contains a row with zero total");
    for (std::size_t k = 0; k < m; ++k) cols[k].merge(t.cols[k]);
    rows.merge(t.rows);
  }

  const double dn = static_cast<double>(n);
  SourceDecomposition out;
  out.convention = convention;
  out.n = n;
  const double vt = rows.value();
  out.mean = vt / dn;
  std::vector<double> means(m), shares(m);
  for (std::size_t k = 0; k < m; ++k) {
    means[k] = cols[k].value() / dn;
    if (!(means[k] > 0.0))
      throw Error(ErrorCode::DegenerateSource, "source " + std::to_string(k) + " is zero for every row");
    shares[k] = means[k] / out.mean;
  }

  struct Entropy {
    std::vector<CompensatedSum> cols;
    CompensatedSum total;
    CompensatedSum cross;  // sum x ln(x / VT_j)
  };
  const auto pass2 = map_chunks<Entropy>(n, exec, [&](std::size_t b, std::size_t e) {
    Entropy s{std::vector<CompensatedSum>(m), {}, {}};
    for (std::size_t j = b; j < e; ++j) {
      double row = 0.0;
      for (std::size_t k = 0; k < m; ++k) row += value(j, k);
      s.total.add(theil_term(row / out.mean));
      for (std::size_t k = 0; k < m; ++k) {
        const double x = value(j, k);
        s.cols[k].add(theil_term(x / means[k]));
        if (x > 0.0) s.cross.add(x * std::log(x / row));
      }
    }
    return s;
  });
  Entropy sums{std::vector<CompensatedSum>(m), {}, {}};
  for (const auto& s : pass2) {
    for (std::size_t k = 0; k < m; ++k) sums.cols[k].merge(s.cols[k]);
    sums.total.merge(s.total);
    sums.cross.merge(s.cross);
  }

  out.theil = sums.total.value() / dn;
  CompensatedSum wg;
  for (std::size_t k = 0; k < m; ++k) {
    SourceTerm t;
    t.label = std::to_string(k);
    t.mean = means[k];
    t.share = shares[k];
    t.theil = sums.cols[k].value() / dn;
    wg.add(t.share * t.theil);
    out.sources.push_back(std::move(t));
  }
  out.t_wg = wg.value();
  out.t_bg = between_sources(shares, convention);
  out.delta_cor_literal = -sums.cross.value() / vt;
  out.delta_cor = convention == Convention::literal ? out.delta_cor_literal
                                                    : out.theil - out.t_wg - out.t_bg;
  return out;
}

}  // namespace detail

/// `matrix` is row-major n x m: one row per person, one column per source.
inline SourceDecomposition decompose_sources(std::span<const double> matrix, std::size_t m,
                                             Convention convention = Convention::literal,
                                             const Exec& exec = {}) {
  if (m == 0 || matrix.size() % m != 0)
    throw Error(ErrorCode::ArgumentError, "matrix size is not a multiple of the source count");
  return detail::decompose_sources_of(matrix.size() / m, m, convention, exec,
                                      [&](std::size_t j, std::size_t k) { return matrix[j * m + k]; });
}

/// Decomposition over a subset of records and sources of a population
/// (e.g. the members of one multi-source group and that group's sources).
inline SourceDecomposition decompose_sources(const Population& population,
                                             std::span<const std::size_t> rows,
                                             std::span<const std::size_t> sources,
                                             Convention convention = Convention::literal,
                                             const Exec& exec = {}) {
  for (std::size_t k : sources)
    if (k >= population.sources()) throw Error(ErrorCode::ArgumentError, "source index out of range");
  auto out = detail::decompose_sources_of(
      rows.size(), sources.size(), convention, exec,
      [&](std::size_t j, std::size_t k) { return population.amount(rows[j], sources[k]); });
  for (std::size_t k = 0; k < sources.size(); ++k) out.sources[k].label = population.labels()[sources[k]];
  return out;
}

/// Pooled decomposition over every record and every source.
inline SourceDecomposition decompose_sources(const Population& population,
                                             Convention convention = Convention::literal,
                                             const Exec& exec = {}) {
  auto out = decompose_sources(population.matrix(), population.sources(), convention, exec);
  for (std::size_t k = 0; k < population.sources(); ++k) out.sources[k].label = population.labels()[k];
  return out;
}

/// T_WG and T_BG from published per-source means and Theil indices, for
/// when the microdata are unavailable.
inline SourceTerms source_terms_from_summaries(std::span<const double> means,
                                               std::span<const double> theils,
                                               Convention convention) {
  if (means.size() != theils.size())
    throw Error(ErrorCode::ArgumentError, "means and theils differ in length");
  if (means.size() < 2) throw Error(ErrorCode::ArgumentError, "need at least two sources");
  CompensatedSum total;
  for (double mu : means) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw Error(ErrorCode::ArgumentError, "means must be positive");
    total.add(mu);
  }
  std::vector<double> shares;
  CompensatedSum wg;
  for (std::size_t k = 0; k < means.size(); ++k) {
    shares.push_back(means[k] / total.value());
    wg.add(shares.back() * theils[k]);
  }
  return SourceTerms{wg.value(), detail::between_sources(shares, convention)};
}

}  // namespace ineq
