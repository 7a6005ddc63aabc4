#pragma once

// Seedable synthetic populations: exponential body with a Pareto tail per
// source, and a categorical draw of each person's source pattern.
//
// Randomness is counter based. Person j draws from a SplitMix64 stream whose
// starting state is mix(seed, j), so every record is a pure function of
// (config, j) and generation order or worker count cannot change the output.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "ineq/error.hpp"
#include "ineq/format.hpp"
#include "ineq/model.hpp"
#include "ineq/parallel.hpp"

namespace ineq {

struct SourceDistConfig {
  double exp_mean = 1.0;
  double tail_prob = 0.0;
  double tail_threshold = 10.0;
  double tail_alpha = 2.5;

  void validate() const {
    if (!(exp_mean > 0.0) || !std::isfinite(exp_mean))
      throw Error(ErrorCode::ArgumentError, "exp_mean must be positive");
    if (!(tail_prob >= 0.0 && tail_prob <= 1.0))
      throw Error(ErrorCode::ArgumentError, "tail_prob must be in [0, 1]");
    if (!(tail_threshold > 0.0) || !std::isfinite(tail_threshold))
      throw Error(ErrorCode::ArgumentError, "tail_threshold must be positive");
    if (!(tail_alpha > 1.0) || !std::isfinite(tail_alpha))
      throw Error(ErrorCode::ArgumentError, "tail_alpha must exceed 1");
  }
};

struct SynthConfig {
  std::size_t n = 1000;
  std::vector<std::string> labels = default_source_labels();
  /// One probability per source pattern, in canonical group order
  /// (G1..G7 for three sources, bitmask order otherwise).
  std::vector<double> pattern_probs;
  std::vector<SourceDistConfig> sources;
  std::uint64_t seed = 0;

  std::size_t m() const noexcept { return labels.size(); }

  void validate() const {
    if (n < 1) throw Error(ErrorCode::ArgumentError, "n must be at least 1");
    if (labels.empty() || labels.size() > kMaxSources)
      throw Error(ErrorCode::ArgumentError, "bad source count");
    const std::size_t patterns = (std::size_t{1} << m()) - 1;
    if (pattern_probs.size() != patterns)
      throw Error(ErrorCode::ArgumentError, "pattern_probs needs " + std::to_string(patterns) + " entries");
    if (sources.size() != m())
      throw Error(ErrorCode::ArgumentError, "need one distribution per source");
    double sum = 0.0;
    for (double p : pattern_probs) {
      if (!(p >= 0.0)) throw Error(ErrorCode::ArgumentError, "pattern probabilities must be >= 0");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw Error(ErrorCode::ArgumentError, "pattern_probs must sum to 1");
    for (const auto& s : sources) s.validate();
  }
};

/// Demo defaults: whole-population mean amounts per source (RON) as the
/// exponential means, 1% Pareto tail with shape 2.5 starting at ten times
/// the mean, and uniform pattern probabilities.
inline SynthConfig default_synth_config(std::size_t n = 1000, std::uint64_t seed = 0) {
  SynthConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  for (double mean : {20623.12, 13752.05, 12017.18})
    cfg.sources.push_back(SourceDistConfig{mean, 0.01, 10.0 * mean, 2.5});
  cfg.pattern_probs.assign(7, 1.0 / 7.0);
  return cfg;
}

/// SplitMix64 stream.
class CounterRng {
public:
  constexpr explicit CounterRng(std::uint64_t state) : state_(state) {}

  /// Independent stream for item `index` under `seed`.
  static constexpr CounterRng for_item(std::uint64_t seed, std::uint64_t index) {
    return CounterRng(mix(seed ^ mix(index + 0x632BE59BD9B4E019ull)));
  }

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  /// Uniform on the open interval (0, 1).
  constexpr double uniform() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t state_;
};

/// Exponential(mean = exp_mean) with probability 1 - tail_prob, otherwise
/// Pareto(scale = tail_threshold, shape = tail_alpha). Always > 0.
inline double sample_amount(const SourceDistConfig& cfg, CounterRng& rng) {
  const double branch = rng.uniform();
  const double u = rng.uniform();
  if (branch < cfg.tail_prob) return cfg.tail_threshold * std::pow(u, -1.0 / cfg.tail_alpha);
  return -cfg.exp_mean * std::log(u);
}

namespace detail {

inline GroupId draw_pattern(std::span<const double> cumulative, std::size_t m, CounterRng& rng) {
  const double u = rng.uniform() * cumulative.back();
  std::size_t i = 0;
  while (i + 1 < cumulative.size() && !(u < cumulative[i])) ++i;
  return GroupId::from_ordinal(i + 1, m);
}

}  // namespace detail

/// Person j (0-based) gets id "p<j+1>".
inline Population generate_population(const SynthConfig& cfg, const Exec& exec = {}) {
  cfg.validate();
  const std::size_t m = cfg.m();

  // Zero-probability patterns are skipped by making their interval empty,
  // and the last positive pattern absorbs rounding at the top.
  std::vector<double> cumulative;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < cfg.pattern_probs.size(); ++i) {
    acc += cfg.pattern_probs[i];
    cumulative.push_back(acc);
    if (cfg.pattern_probs[i] > 0.0) last_positive = i;
  }
  cumulative.resize(last_positive + 1);
  cumulative.back() = std::max(cumulative.back(), acc);

  struct Chunk {
    std::vector<double> amounts;
    std::string ids;
    std::vector<std::uint32_t> id_lengths;
  };
  Population population(cfg.labels);
  population.reserve(cfg.n, cfg.n * 9);

  const std::size_t chunk = std::max<std::size_t>(1, exec.chunk_size);
  const std::size_t window = chunk * std::max(1u, exec.threads) * 4;
  for (std::size_t base = 0; base < cfg.n; base += window) {
    const std::size_t count = std::min(window, cfg.n - base);
    auto chunks = map_chunks<Chunk>(count, exec, [&](std::size_t b, std::size_t e) {
      Chunk c;
      c.amounts.reserve((e - b) * m);
      c.id_lengths.reserve(e - b);
      for (std::size_t local = b; local < e; ++local) {
        const std::size_t j = base + local;
        CounterRng rng = CounterRng::for_item(cfg.seed, j);
        const GroupId g = detail::draw_pattern(cumulative, m, rng);
        for (std::size_t k = 0; k < m; ++k)
          c.amounts.push_back(g.has(k) ? sample_amount(cfg.sources[k], rng) : 0.0);
        const std::size_t before = c.ids.size();
        c.ids += 'p';
        c.ids += std::to_string(j + 1);
        c.id_lengths.push_back(static_cast<std::uint32_t>(c.ids.size() - before));
      }
      return c;
    });
    for (const auto& c : chunks) {
      std::size_t offset = 0;
      for (std::size_t r = 0; r < c.id_lengths.size(); ++r) {
        population.append_unchecked(std::string_view(c.ids).substr(offset, c.id_lengths[r]),
                                    std::span<const double>(c.amounts).subspan(r * m, m));
        offset += c.id_lengths[r];
      }
    }
  }
  return population;
}

/// Writes the CSV format read by load_population. Amounts use the shortest
/// round-trip representation, so a reload reproduces every double exactly.
inline void write_csv(std::ostream& os, const Population& population, const Exec& exec = {}) {
  std::string header = "person_id";
  for (const auto& l : population.labels()) header += "," + l;
  header += '\n';
  os.write(header.data(), static_cast<std::streamsize>(header.size()));

  const std::size_t chunk = std::max<std::size_t>(1, exec.chunk_size);
  const std::size_t window = chunk * std::max(1u, exec.threads) * 4;
  for (std::size_t base = 0; base < population.size(); base += window) {
    const std::size_t count = std::min(window, population.size() - base);
    const auto texts = map_chunks<std::string>(count, exec, [&](std::size_t b, std::size_t e) {
      std::string s;
      s.reserve((e - b) * 48);
      for (std::size_t j = base + b; j < base + e; ++j) {
        s += population.person_id(j);
        for (double a : population.amounts(j)) {
          s += ',';
          append_double(s, a);
        }
        s += '\n';
      }
      return s;
    });
    for (const auto& t : texts) os.write(t.data(), static_cast<std::streamsize>(t.size()));
  }
  if (!os) throw Error(ErrorCode::IoError, "write failure");
}

}  // namespace ineq
