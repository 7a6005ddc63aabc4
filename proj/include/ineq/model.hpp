#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ineq/error.hpp"
#include "ineq/parallel.hpp"

namespace ineq {

inline constexpr std::size_t kMaxSources = 16;

inline const std::vector<std::string>& default_source_labels() {
  static const std::vector<std::string> labels{"wages", "capital", "other"};
  return labels;
}

struct SourceId {
  std::size_t index = 0;
  std::string label;
};

/// One person's per-source annual income.
struct IncomeRecord {
  std::string person_id;
  std::vector<double> amounts;

  double total() const noexcept {
    double t = 0.0;
    for (double a : amounts) t += a;
    return t;
  }

  friend bool operator==(const IncomeRecord&, const IncomeRecord&) = default;
};

/// Checks the IncomeRecord invariants on a raw amount row.
inline void validate_amounts(std::span<const double> amounts) {
  bool any_positive = false;
  for (double a : amounts) {
    if (!std::isfinite(a)) throw Error(ErrorCode::Malformed, "non-finite amount");
    if (a < 0.0) throw Error(ErrorCode::NegativeIncome, "negative amount");
    any_positive = any_positive || a > 0.0;
  }
  if (!any_positive) throw Error(ErrorCode::AllZero, "record has no positive amount");
}

/// Source pattern: the nonempty set of sources a person earns from, as a
/// bitmask (bit k set <=> amount k > 0).
class GroupId {
public:
  constexpr GroupId() = default;
  constexpr explicit GroupId(std::uint32_t mask) : mask_(mask) {}

  constexpr std::uint32_t mask() const noexcept { return mask_; }
  constexpr bool has(std::size_t source) const noexcept { return (mask_ >> source) & 1u; }
  constexpr std::size_t source_count() const noexcept {
    return static_cast<std::size_t>(std::popcount(mask_));
  }

  /// Position in the canonical group order: G1..G7 for three sources,
  /// the mask itself otherwise. Always in [1, 2^m - 1].
  constexpr std::size_t ordinal(std::size_t m) const noexcept {
    if (m == 3) return kMaskToG[mask_ & 7u];
    return mask_;
  }

  static constexpr GroupId from_ordinal(std::size_t ordinal, std::size_t m) {
    if (m == 3) return GroupId(kGToMask[ordinal & 7u]);
    return GroupId(static_cast<std::uint32_t>(ordinal));
  }

  /// "G4" for three sources; "{wages+other}" style otherwise.
  std::string label(std::span<const std::string> source_labels) const {
    if (source_labels.size() == 3) return "G" + std::to_string(ordinal(3));
    std::string out = "{";
    bool first = true;
    for (std::size_t k = 0; k < source_labels.size(); ++k) {
      if (!has(k)) continue;
      if (!first) out += '+';
      out += source_labels[k];
      first = false;
    }
    return out + "}";
  }

  friend constexpr bool operator==(GroupId, GroupId) = default;
  friend constexpr auto operator<=>(GroupId, GroupId) = default;

private:
  // {wages}=1 G1, {capital}=2 G2, {other}=4 G3, {wages,other}=5 G4,
  // {wages,capital}=3 G5, {capital,other}=6 G6, all=7 G7.
  static constexpr std::array<std::size_t, 8> kMaskToG{0, 1, 2, 5, 3, 4, 6, 7};
  static constexpr std::array<std::uint32_t, 8> kGToMask{0, 1, 2, 4, 5, 3, 6, 7};

  std::uint32_t mask_ = 0;
};

inline GroupId group_of(std::span<const double> amounts) {
  std::uint32_t mask = 0;
  for (std::size_t k = 0; k < amounts.size(); ++k)
    if (amounts[k] > 0.0) mask |= 1u << k;
  if (mask == 0) throw Error(ErrorCode::AllZero, "record has no positive amount");
  return GroupId(mask);
}

inline GroupId group_of(const IncomeRecord& record) { return group_of(record.amounts); }

/// Validated record collection stored column-friendly: amounts are a dense
/// row-major n x m matrix and person ids share one character buffer.
class Population {
public:
  explicit Population(std::vector<std::string> labels = default_source_labels())
      : labels_(std::move(labels)) {
    if (labels_.empty() || labels_.size() > kMaxSources)
      throw Error(ErrorCode::ArgumentError,
                  "source count must be in [1, " + std::to_string(kMaxSources) + "]");
    for (std::size_t i = 0; i < labels_.size(); ++i)
      for (std::size_t j = i + 1; j < labels_.size(); ++j)
        if (labels_[i] == labels_[j])
          throw Error(ErrorCode::ArgumentError, "duplicate source label '" + labels_[i] + "'");
    id_offsets_.push_back(0);
  }

  std::size_t size() const noexcept { return id_offsets_.size() - 1; }
  bool empty() const noexcept { return size() == 0; }
  std::size_t sources() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  SourceId source(std::size_t k) const { return SourceId{k, labels_.at(k)}; }

  std::optional<std::size_t> source_index(std::string_view label) const {
    for (std::size_t k = 0; k < labels_.size(); ++k)
      if (labels_[k] == label) return k;
    return std::nullopt;
  }

  void reserve(std::size_t n, std::size_t id_bytes = 0) {
    amounts_.reserve(n * sources());
    id_offsets_.reserve(n + 1);
    if (id_bytes != 0) id_chars_.reserve(id_bytes);
  }

  /// Appends after validating the IncomeRecord invariants.
  void append(std::string_view person_id, std::span<const double> amounts) {
    if (amounts.size() != sources())
      throw Error(ErrorCode::ArgumentError, "record has " + std::to_string(amounts.size()) +
                                                " amounts, population has " +
                                                std::to_string(sources()) + " sources");
    validate_amounts(amounts);
    append_unchecked(person_id, amounts);
  }

  void append(const IncomeRecord& record) { append(record.person_id, record.amounts); }

  void append_unchecked(std::string_view person_id, std::span<const double> amounts) {
    amounts_.insert(amounts_.end(), amounts.begin(), amounts.end());
    id_chars_.append(person_id);
    id_offsets_.push_back(id_chars_.size());
  }

  std::span<const double> amounts(std::size_t j) const noexcept {
    return {amounts_.data() + j * sources(), sources()};
  }
  double amount(std::size_t j, std::size_t k) const noexcept { return amounts_[j * sources() + k]; }

  /// Row total, summed in source order.
  double total(std::size_t j) const noexcept {
    double t = 0.0;
    for (double a : amounts(j)) t += a;
    return t;
  }

  std::string_view person_id(std::size_t j) const noexcept {
    return std::string_view(id_chars_).substr(id_offsets_[j], id_offsets_[j + 1] - id_offsets_[j]);
  }

  IncomeRecord record(std::size_t j) const {
    auto a = amounts(j);
    return IncomeRecord{std::string(person_id(j)), std::vector<double>(a.begin(), a.end())};
  }

  /// Dense n x m row-major matrix.
  std::span<const double> matrix() const noexcept { return amounts_; }

  std::vector<double> totals(const Exec& exec = {}) const {
    std::vector<double> out(size());
    for_each_chunk(size(), exec, [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t j = b; j < e; ++j) out[j] = total(j);
    });
    return out;
  }

  friend bool operator==(const Population&, const Population&) = default;

private:
  std::vector<std::string> labels_;
  std::vector<double> amounts_;
  std::string id_chars_;
  std::vector<std::size_t> id_offsets_;
};

struct GroupStats {
  GroupId id;
  std::vector<std::size_t> members;  // ascending record indices
  std::size_t n = 0;
  double total = 0.0;  // VT_i
  double mean = 0.0;   // VT_i / n_i
};

/// Split of a population into its nonempty source-pattern groups, in
/// canonical group order.
struct GroupPartition {
  std::size_t n = 0;
  std::size_t m = 0;
  double total = 0.0;  // VT
  std::vector<GroupStats> groups;

  const GroupStats* find(GroupId id) const noexcept {
    for (const auto& g : groups)
      if (g.id == id) return &g;
    return nullptr;
  }
};

/// Assigns every record to its source-pattern group. Membership lists keep
/// file order; totals are compensated sums combined in chunk order, so the
/// result does not depend on the worker count.
inline GroupPartition partition(const Population& population, const Exec& exec = {}) {
  if (population.empty()) throw Error(ErrorCode::EmptySeries, "population is empty");
  const std::size_t m = population.sources();
  const std::size_t masks = std::size_t{1} << m;

  struct Partial {
    std::vector<std::vector<std::size_t>> members;
    std::vector<CompensatedSum> totals;
  };
  auto partials = map_chunks<Partial>(population.size(), exec, [&](std::size_t b, std::size_t e) {
    Partial p{std::vector<std::vector<std::size_t>>(masks), std::vector<CompensatedSum>(masks)};
    for (std::size_t j = b; j < e; ++j) {
      const auto amounts = population.amounts(j);
      const GroupId g = group_of(amounts);
      p.members[g.mask()].push_back(j);
      for (double a : amounts) p.totals[g.mask()].add(a);
    }
    return p;
  });

  GroupPartition out;
  out.n = population.size();
  out.m = m;
  std::vector<GroupStats> by_mask(masks);
  std::vector<CompensatedSum> totals(masks);
  for (std::size_t mask = 1; mask < masks; ++mask) {
    std::size_t count = 0;
    for (const auto& p : partials) count += p.members[mask].size();
    by_mask[mask].members.reserve(count);
  }
  for (auto& p : partials) {
    for (std::size_t mask = 1; mask < masks; ++mask) {
      auto& dst = by_mask[mask].members;
      dst.insert(dst.end(), p.members[mask].begin(), p.members[mask].end());
      totals[mask].merge(p.totals[mask]);
    }
    p = Partial{};
  }

  CompensatedSum grand;
  for (std::size_t ordinal = 1; ordinal < masks; ++ordinal) {
    const GroupId id = GroupId::from_ordinal(ordinal, m);
    auto& g = by_mask[id.mask()];
    if (g.members.empty()) continue;
    g.id = id;
    g.n = g.members.size();
    g.total = totals[id.mask()].value();
    g.mean = g.total / static_cast<double>(g.n);
    grand.merge(totals[id.mask()]);
    out.groups.push_back(std::move(g));
  }
  out.total = grand.value();
  return out;
}

/// Values of one column (or the row totals when source is empty) for the
/// given record indices.
inline std::vector<double> gather(const Population& population, std::span<const std::size_t> rows,
                                  std::optional<std::size_t> source = std::nullopt) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t j : rows) out.push_back(source ? population.amount(j, *source) : population.total(j));
  return out;
}

/// Amounts of one source over every record, zeros included.
inline std::vector<double> column(const Population& population, std::size_t source) {
  std::vector<double> out(population.size());
  for (std::size_t j = 0; j < population.size(); ++j) out[j] = population.amount(j, source);
  return out;
}

/// Strictly positive amounts of one source, in record order.
inline std::vector<double> earners(const Population& population, std::size_t source) {
  std::vector<double> out;
  for (std::size_t j = 0; j < population.size(); ++j)
    if (const double a = population.amount(j, source); a > 0.0) out.push_back(a);
  return out;
}

}  // namespace ineq
