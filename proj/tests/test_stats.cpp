#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "ineq/stats.hpp"
#include "support/random_data.hpp"

namespace {

using V = std::vector<double>;

std::vector<double> one_to_hundred() {
  V v(100);
  std::iota(v.begin(), v.end(), 1.0);
  return v;
}

TEST(DescriptiveStats, SmallEvenSeries) {
  const auto s = ineq::descriptive_stats(V{2, 4, 6, 8});
  EXPECT_EQ(s.n, 4u);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_DOUBLE_EQ(s.median, 5.0);
  // sqrt(20/3), from a 40-digit evaluation.
  EXPECT_NEAR(s.std_dev, 2.581988897471611, 1e-14);
  EXPECT_NEAR(*s.cv_percent, 51.63977794943222, 1e-12);
  EXPECT_DOUBLE_EQ(*s.mean_over_median, 1.0);
}

TEST(DescriptiveStats, SingletonAndConstant) {
  const auto one = ineq::descriptive_stats(V{5});
  EXPECT_EQ(one.mean, 5.0);
  EXPECT_EQ(one.median, 5.0);
  EXPECT_EQ(one.std_dev, 0.0);

  const auto c = ineq::descriptive_stats(V(17, 3.25));
  EXPECT_EQ(*c.cv_percent, 0.0);
  EXPECT_EQ(*c.mean_over_median, 1.0);
  EXPECT_EQ(*c.ratio_top_bottom_1, 1.0);
}

TEST(DescriptiveStats, OddMedianAndZeroMedian) {
  EXPECT_EQ(ineq::descriptive_stats(V{9, 1, 5}).median, 5.0);
  const auto s = ineq::descriptive_stats(V{0, 0, 0, 4});
  EXPECT_EQ(s.median, 0.0);
  EXPECT_FALSE(s.mean_over_median.has_value());
  EXPECT_FALSE(s.ratio_top_bottom_10.has_value());
}

TEST(DescriptiveStats, Errors) {
  try {
    ineq::descriptive_stats(V{});
    FAIL();
  } catch (const ineq::Error& e) {
    EXPECT_EQ(e.code(), ineq::ErrorCode::EmptySeries);
  }
  EXPECT_THROW(ineq::descriptive_stats(V{1, -2}), ineq::Error);
}

TEST(TopBottomRatio, OneToHundred) {
  const auto v = one_to_hundred();
  EXPECT_DOUBLE_EQ(*ineq::top_bottom_ratio(v, 1), 100.0);
  EXPECT_NEAR(*ineq::top_bottom_ratio(v, 10), 955.0 / 55.0, 1e-12);
  EXPECT_NEAR(*ineq::top_bottom_ratio(v, 10), 17.3636, 1e-4);
}

TEST(TopBottomRatio, ConstantUndefinedAndArguments) {
  EXPECT_EQ(*ineq::top_bottom_ratio(V(10, 7.0), 10), 1.0);
  EXPECT_FALSE(ineq::top_bottom_ratio(V{0, 0, 1}, 1).has_value());
  EXPECT_THROW(ineq::top_bottom_ratio(V{1, 2}, 0), ineq::Error);
  EXPECT_THROW(ineq::top_bottom_ratio(V{1, 2}, 51), ineq::Error);
  EXPECT_THROW(ineq::top_bottom_ratio(V{}, 1), ineq::Error);
  // k = max(1, floor(qn/100)): n = 1 still compares the element with itself.
  EXPECT_EQ(*ineq::top_bottom_ratio(V{4}, 50), 1.0);
}

// Oracle: full sort, then direct sums.
double sorted_ratio(V v, double q) {
  std::sort(v.begin(), v.end());
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(q * v.size() / 100.0)));
  double bottom = 0, top = 0;
  for (std::size_t i = 0; i < k; ++i) {
    bottom += v[i];
    top += v[v.size() - 1 - i];
  }
  return top / bottom;
}

TEST(TopBottomRatio, MatchesSortingOracleAndIsAtLeastOne) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const auto v = ineq::testing::random_series(rng, ineq::testing::random_size(rng, 1, 3000), 0.0);
    for (double q : {1.0, 10.0, 25.0, 50.0}) {
      const auto r = ineq::top_bottom_ratio(v, q);
      ASSERT_TRUE(r.has_value());
      EXPECT_GE(*r, 1.0);
      EXPECT_LE(ineq::testing::rel_diff(*r, sorted_ratio(v, q)), 1e-12);
    }
  }
}

TEST(DescriptiveStats, PermutationAndScaleInvariance) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    auto v = ineq::testing::random_series(rng, ineq::testing::random_size(rng, 2, 5000), 0.0);
    const auto base = ineq::descriptive_stats(v);
    auto shuffled = v;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto perm = ineq::descriptive_stats(shuffled);
    EXPECT_LE(ineq::testing::rel_diff(perm.mean, base.mean), 1e-14);
    EXPECT_EQ(perm.median, base.median);
    EXPECT_LE(ineq::testing::rel_diff(perm.std_dev, base.std_dev), 1e-12);

    const double c = std::uniform_real_distribution<double>(0.01, 1000.0)(rng);
    for (auto& x : v) x *= c;
    const auto scaled = ineq::descriptive_stats(v);
    EXPECT_LE(ineq::testing::rel_diff(scaled.mean, c * base.mean), 1e-12);
    EXPECT_LE(ineq::testing::rel_diff(scaled.median, c * base.median), 1e-12);
    EXPECT_LE(ineq::testing::rel_diff(scaled.std_dev, c * base.std_dev), 1e-12);
    EXPECT_LE(ineq::testing::rel_diff(*scaled.cv_percent, *base.cv_percent), 1e-12);
    EXPECT_LE(ineq::testing::rel_diff(*scaled.mean_over_median, *base.mean_over_median), 1e-12);
    EXPECT_LE(ineq::testing::rel_diff(*scaled.ratio_top_bottom_1, *base.ratio_top_bottom_1), 1e-12);
    EXPECT_LE(ineq::testing::rel_diff(*scaled.ratio_top_bottom_10, *base.ratio_top_bottom_10), 1e-12);
  }
}

TEST(DescriptiveStats, IdenticalAcrossThreadCounts) {
  std::mt19937_64 rng(2);
  const auto v = ineq::testing::random_series(rng, 500000, 0.2);
  const auto ref = ineq::descriptive_stats(v, ineq::Exec{1});
  for (unsigned t : {2u, 5u}) {
    const auto s = ineq::descriptive_stats(v, ineq::Exec{t});
    EXPECT_EQ(s.mean, ref.mean);
    EXPECT_EQ(s.std_dev, ref.std_dev);
    EXPECT_EQ(s.median, ref.median);
  }
}

TEST(Histogram, UnitBins) {
  const auto h = ineq::histogram(V{0.5, 1.5, 2.5}, 1.0, 0.0, 3.0);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{1, 1, 1}));
  EXPECT_EQ(h.bin_edges, (V{0, 1, 2, 3}));
  const auto upper = ineq::histogram(V{3.0}, 1.0, 0.0, 3.0);
  EXPECT_EQ(upper.overflow, 1u);
  EXPECT_EQ(ineq::histogram(V{-0.1}, 1.0, 0.0, 3.0).underflow, 1u);
}

TEST(Histogram, PartialLastBinAndErrors) {
  const auto h = ineq::histogram(V{2.6}, 1.0, 0.0, 2.5);
  EXPECT_EQ(h.counts.size(), 3u);
  EXPECT_EQ(h.bin_edges.back(), 2.5);
  EXPECT_EQ(h.overflow, 1u);
  EXPECT_THROW(ineq::histogram(V{1}, 0.0, 0.0, 1.0), ineq::Error);
  EXPECT_THROW(ineq::histogram(V{1}, 1.0, 2.0, 1.0), ineq::Error);
}

TEST(Histogram, ExponentialDrawsMatchIndependentBinning) {
  std::mt19937_64 rng(1234);
  std::exponential_distribution<double> expo(1.0 / 1000.0);
  V v(1000000);
  for (auto& x : v) x = expo(rng);
  const double width = 100.0;  // mean / 10
  const double hi = 3000.0;
  const auto h = ineq::histogram(v, width, 0.0, hi);
  EXPECT_EQ(h.total(), v.size());

  // Independent binning: sort once, count with binary searches over edges.
  V sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double lo = i * width, up = (i + 1) * width;
    const auto count = std::lower_bound(sorted.begin(), sorted.end(), up) -
                       std::lower_bound(sorted.begin(), sorted.end(), lo);
    EXPECT_EQ(h.counts[i], static_cast<std::size_t>(count));
  }
  // Mode is the first bin; beyond it counts fall within sampling noise.
  for (std::size_t i = 0; i + 1 < h.counts.size(); ++i) {
    const double c = static_cast<double>(h.counts[i]);
    EXPECT_LE(static_cast<double>(h.counts[i + 1]), c + 3.0 * std::sqrt(c));
  }
}

TEST(Histogram, CountConservationProperty) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto v = ineq::testing::random_series(rng, ineq::testing::random_size(rng, 1, 2000));
    const double lo = std::uniform_real_distribution<double>(-10, 500)(rng);
    const double hi = lo + std::uniform_real_distribution<double>(1, 3000)(rng);
    const double w = std::uniform_real_distribution<double>(0.5, 400)(rng);
    const auto h = ineq::histogram(v, w, lo, hi);
    EXPECT_EQ(h.total(), v.size());
    EXPECT_TRUE(std::adjacent_find(h.bin_edges.begin(), h.bin_edges.end(),
                                   [](double a, double b) { return !(a < b); }) == h.bin_edges.end());
  }
}

TEST(Histogram, CsvLayout) {
  std::ostringstream os;
  ineq::write_csv(os, ineq::histogram(V{0.5, 3}, 1.0, 0.0, 2.0));
  EXPECT_EQ(os.str(), "bin,lo,hi,count\nunderflow,,0,0\n0,0,1,1\n1,1,2,0\noverflow,2,,1\n");
}

TEST(GroupSummary, TinyPartition) {
  ineq::Population pop;
  pop.append(ineq::IncomeRecord{"a", {1, 0, 0}});
  pop.append(ineq::IncomeRecord{"b", {0, 2, 0}});
  pop.append(ineq::IncomeRecord{"c", {3, 0, 4}});
  const auto s = ineq::group_summary(ineq::partition(pop), pop.labels());
  ASSERT_EQ(s.rows.size(), 3u);
  for (const auto& r : s.rows) EXPECT_DOUBLE_EQ(r.population_share, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.rows[0].income_share, 0.1);
  EXPECT_DOUBLE_EQ(s.rows[1].income_share, 0.2);
  EXPECT_DOUBLE_EQ(s.rows[2].income_share, 0.7);
  EXPECT_EQ(s.rows[2].label, "G4");

  std::ostringstream os;
  ineq::write_csv(os, s);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "group,n,population_share,income_share,mean");
}

TEST(GroupSummary, SharesSumToOne) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = ineq::testing::random_size(rng, 1, 5000);
    const auto matrix = ineq::testing::random_matrix(rng, n, 3, 0.5);
    ineq::Population pop;
    for (std::size_t j = 0; j < n; ++j) pop.append("p", std::span<const double>(matrix).subspan(j * 3, 3));
    const auto s = ineq::group_summary(ineq::partition(pop), pop.labels());
    double pop_share = 0, income_share = 0;
    for (const auto& r : s.rows) {
      pop_share += r.population_share;
      income_share += r.income_share;
    }
    EXPECT_NEAR(pop_share, 1.0, 1e-12);
    EXPECT_NEAR(income_share, 1.0, 1e-12);
  }
}

TEST(GroupSummary, SingleGroup) {
  ineq::Population pop;
  pop.append(ineq::IncomeRecord{"a", {1, 0, 0}});
  pop.append(ineq::IncomeRecord{"b", {5, 0, 0}});
  const auto s = ineq::group_summary(ineq::partition(pop), pop.labels());
  ASSERT_EQ(s.rows.size(), 1u);
  EXPECT_EQ(s.rows[0].population_share, 1.0);
  EXPECT_EQ(s.rows[0].income_share, 1.0);
}

}  // namespace
