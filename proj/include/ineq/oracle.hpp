#pragma once

// Reference implementations: direct single-threaded loops over the defining
// formulas with plain summation. They are the arbiter in equivalence tests
// and stay deliberately unoptimized.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ineq/error.hpp"
#include "ineq/theil.hpp"

namespace ineq::oracle {

inline double naive_theil(std::span<const double> series) {
  if (series.empty()) throw Error(ErrorCode::EmptySeries, "series is empty");
  double sum = 0.0;
  for (double v : series) {
    if (v < 0.0) throw Error(ErrorCode::NegativeIncome, "negative value");
    sum += v;
  }
  const double n = static_cast<double>(series.size());
  const double mu = sum / n;
  if (!(mu > 0.0)) throw Error(ErrorCode::ZeroMean, "zero mean");
  double t = 0.0;
  for (double v : series)
    if (v > 0.0) t += (v / mu) * std::log(v / mu);
  return t / n;
}

struct DisjointTerms {
  double theil = 0.0;
  double t_wi = 0.0;
  double t_bi = 0.0;
};

inline DisjointTerms naive_decompose_disjoint(const std::vector<std::vector<double>>& groups) {
  double vt = 0.0;
  std::size_t n = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw Error(ErrorCode::EmptySeries, "group is empty");
    for (double v : g) {
      if (v < 0.0) throw Error(ErrorCode::NegativeIncome, "negative value");
      vt += v;
    }
    n += g.size();
  }
  if (n == 0) throw Error(ErrorCode::EmptySeries, "no groups");
  const double mu = vt / static_cast<double>(n);
  if (!(mu > 0.0)) throw Error(ErrorCode::ZeroMean, "zero mean");

  DisjointTerms out;
  for (const auto& g : groups)
    for (double v : g)
      if (v > 0.0) out.theil += (v / mu) * std::log(v / mu);
  out.theil /= static_cast<double>(n);

  for (const auto& g : groups) {
    double vt_i = 0.0;
    for (double v : g) vt_i += v;
    if (vt_i <= 0.0) continue;
    const double n_i = static_cast<double>(g.size());
    const double mu_i = vt_i / n_i;
    out.t_wi += (vt_i / vt) * naive_theil(g);
    out.t_bi += (n_i / static_cast<double>(n)) * (mu_i / mu) * std::log(mu_i / mu);
  }
  return out;
}

struct SourceTermsNaive {
  double theil = 0.0;
  double t_wg = 0.0;
  double t_bg = 0.0;
  double delta_cor = 0.0;
};

/// `matrix` is row-major n x m.
inline SourceTermsNaive naive_decompose_sources(std::span<const double> matrix, std::size_t m,
                                                Convention convention) {
  if (m < 2) throw Error(ErrorCode::ArgumentError, "need at least two sources");
  if (matrix.size() % m != 0 || matrix.empty())
    throw Error(ErrorCode::ArgumentError, "bad matrix shape");
  const std::size_t n = matrix.size() / m;

  std::vector<double> row_total(n, 0.0);
  std::vector<std::vector<double>> cols(m, std::vector<double>(n));
  double vt = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < m; ++k) {
      const double x = matrix[j * m + k];
      if (x < 0.0) throw Error(ErrorCode::NegativeIncome, "negative value");
      cols[k][j] = x;
      row_total[j] += x;
    }
    if (!(row_total[j] > 0.0)) throw Error(ErrorCode::AllZero, "zero row");
    vt += row_total[j];
  }
  const double mu = vt / static_cast<double>(n);

  SourceTermsNaive out;
  out.theil = naive_theil(row_total);
  for (std::size_t k = 0; k < m; ++k) {
    double s = 0.0;
    for (double x : cols[k]) s += x;
    if (!(s > 0.0)) throw Error(ErrorCode::DegenerateSource, "zero column");
    const double mu_k = s / static_cast<double>(n);
    out.t_wg += (mu_k / mu) * naive_theil(cols[k]);
    out.t_bg += (mu_k / mu) * std::log(mu_k / mu);
  }
  if (convention == Convention::literal) {
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t j = 0; j < n; ++j)
        if (cols[k][j] > 0.0) out.delta_cor -= (cols[k][j] / vt) * std::log(cols[k][j] / row_total[j]);
  } else {
    out.t_bg += std::log(static_cast<double>(m));
    out.delta_cor = out.theil - out.t_wg - out.t_bg;
  }
  return out;
}

}  // namespace ineq::oracle
