#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ineq/model.hpp"
#include "ineq/synth.hpp"

namespace {

// Closed-form moments of the exponential/Pareto mixture.
double mixture_mean(const ineq::SourceDistConfig& c) {
  return (1 - c.tail_prob) * c.exp_mean + c.tail_prob * c.tail_threshold * c.tail_alpha / (c.tail_alpha - 1);
}
double mixture_second_moment(const ineq::SourceDistConfig& c) {
  return (1 - c.tail_prob) * 2 * c.exp_mean * c.exp_mean +
         c.tail_prob * c.tail_threshold * c.tail_threshold * c.tail_alpha / (c.tail_alpha - 2);
}

std::vector<double> draws(const ineq::SourceDistConfig& cfg, std::size_t n, std::uint64_t seed) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = ineq::CounterRng::for_item(seed, i);
    out[i] = ineq::sample_amount(cfg, rng);
  }
  return out;
}

// Hill estimator over the top k order statistics.
double hill_alpha(std::vector<double> v, std::size_t k) {
  std::sort(v.begin(), v.end(), std::greater<>());
  double s = 0;
  for (std::size_t i = 0; i < k; ++i) s += std::log(v[i] / v[k]);
  return static_cast<double>(k) / s;
}

TEST(CounterRng, UniformIsOpenInterval) {
  auto rng = ineq::CounterRng::for_item(1, 2);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(SampleAmount, PureExponentialMean) {
  const ineq::SourceDistConfig cfg{1000.0, 0.0, 10000.0, 2.5};
  const auto v = draws(cfg, 1000000, 5);
  double s = 0;
  for (double x : v) {
    ASSERT_GT(x, 0.0);
    s += x;
  }
  EXPECT_NEAR(s / v.size(), 1000.0, 10.0);
}

TEST(SampleAmount, PureParetoTailExponent) {
  const ineq::SourceDistConfig cfg{1000.0, 1.0, 5000.0, 2.5};
  const auto v = draws(cfg, 1000000, 6);
  EXPECT_GE(*std::min_element(v.begin(), v.end()), 5000.0);
  // Top decade of the sample: 10^5 order statistics.
  EXPECT_NEAR(hill_alpha(v, 100000), 2.5, 0.2);
}

TEST(SampleAmount, MixtureMeanWithinThreeStandardErrors) {
  const ineq::SourceDistConfig cfg{20000.0, 0.05, 100000.0, 3.5};
  const std::size_t n = 1000000;
  const auto v = draws(cfg, n, 7);
  double s = 0;
  for (double x : v) s += x;
  const double mean = mixture_mean(cfg);
  const double se = std::sqrt((mixture_second_moment(cfg) - mean * mean) / n);
  EXPECT_LE(std::fabs(s / n - mean), 3 * se);
}

TEST(SampleAmount, FixedSeedIsDeterministic) {
  const ineq::SourceDistConfig cfg{10.0, 0.3, 50.0, 2.5};
  EXPECT_EQ(draws(cfg, 1000, 77), draws(cfg, 1000, 77));
  EXPECT_NE(draws(cfg, 1000, 77), draws(cfg, 1000, 78));
}

TEST(GeneratePopulation, ConcentratedOnG7) {
  auto cfg = ineq::default_synth_config(2000, 1);
  cfg.pattern_probs = {0, 0, 0, 0, 0, 0, 1};
  const auto part = ineq::partition(ineq::generate_population(cfg));
  ASSERT_EQ(part.groups.size(), 1u);
  EXPECT_EQ(part.groups[0].id.ordinal(3), 7u);
}

TEST(GeneratePopulation, GroupFrequenciesWithinThreeStandardErrors) {
  auto cfg = ineq::default_synth_config(1000000, 2024);
  cfg.pattern_probs = {0.30, 0.05, 0.25, 0.15, 0.10, 0.05, 0.10};
  const auto pop = ineq::generate_population(cfg, ineq::Exec{2});
  const auto part = ineq::partition(pop);
  std::vector<std::size_t> counts(8, 0);
  for (const auto& g : part.groups) counts[g.id.ordinal(3)] = g.n;
  for (std::size_t i = 1; i <= 7; ++i) {
    const double p = cfg.pattern_probs[i - 1];
    const double se = std::sqrt(p * (1 - p) / cfg.n);
    EXPECT_LE(std::fabs(static_cast<double>(counts[i]) / cfg.n - p), 3 * se) << "G" << i;
  }
}

TEST(GeneratePopulation, RecordsAreValidAndMarginalsConverge) {
  auto cfg = ineq::default_synth_config(400000, 8);
  cfg.pattern_probs = {0, 0, 0, 0, 0, 0, 1};
  const auto pop = ineq::generate_population(cfg);
  for (std::size_t k = 0; k < 3; ++k) {
    double s = 0;
    for (std::size_t j = 0; j < pop.size(); ++j) s += pop.amount(j, k);
    const auto& c = cfg.sources[k];
    const double mean = mixture_mean(c);
    const double se = std::sqrt((mixture_second_moment(c) - mean * mean) / pop.size());
    EXPECT_LE(std::fabs(s / pop.size() - mean), 3 * se) << "source " << k;
  }
  for (std::size_t j = 0; j < pop.size(); j += 997) EXPECT_NO_THROW(ineq::validate_amounts(pop.amounts(j)));
}

TEST(GeneratePopulation, IdenticalForAnyWorkerCount) {
  const auto cfg = ineq::default_synth_config(200000, 99);
  const auto ref = ineq::generate_population(cfg, ineq::Exec{1});
  for (unsigned t : {2u, 3u, 8u}) EXPECT_TRUE(ineq::generate_population(cfg, ineq::Exec{t}) == ref);
  EXPECT_EQ(ref.person_id(0), "p1");
  EXPECT_EQ(ref.person_id(199999), "p200000");
}

TEST(GeneratePopulation, TwoSourceConfig) {
  ineq::SynthConfig cfg;
  cfg.n = 1000;
  cfg.labels = {"a", "b"};
  cfg.pattern_probs = {0.2, 0.3, 0.5};
  cfg.sources = {{10, 0, 100, 2.5}, {20, 0.1, 100, 2.5}};
  const auto pop = ineq::generate_population(cfg);
  EXPECT_EQ(pop.sources(), 2u);
  EXPECT_EQ(ineq::partition(pop).groups.size(), 3u);
}

TEST(SynthConfig, Validation) {
  auto cfg = ineq::default_synth_config();
  cfg.pattern_probs = {0.5, 0.5, 0.5, 0, 0, 0, 0};
  EXPECT_THROW(cfg.validate(), ineq::Error);
  cfg = ineq::default_synth_config();
  cfg.pattern_probs.pop_back();
  EXPECT_THROW(cfg.validate(), ineq::Error);
  cfg = ineq::default_synth_config();
  cfg.sources[1].tail_alpha = 1.0;
  EXPECT_THROW(cfg.validate(), ineq::Error);
  cfg = ineq::default_synth_config();
  cfg.n = 0;
  EXPECT_THROW(cfg.validate(), ineq::Error);
}

TEST(WriteCsv, Layout) {
  ineq::Population pop({"a", "b"});
  pop.append(ineq::IncomeRecord{"x", {1.5, 0}});
  std::ostringstream os;
  ineq::write_csv(os, pop);
  EXPECT_EQ(os.str(), "person_id,a,b\nx,1.5,0\n");
}

}  // namespace
