#pragma once

// JSON views of results and the sections of the full analysis report.
// Undefined values are written as the string "undefined", never as
// infinity or NaN.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ineq/ingest.hpp"
#include "ineq/model.hpp"
#include "ineq/oracle.hpp"
#include "ineq/stats.hpp"
#include "ineq/synth.hpp"
#include "ineq/theil.hpp"

namespace ineq {

using Json = nlohmann::ordered_json;

inline Json optional_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json("undefined");
}

inline Json to_json(const DescStats& s) {
  return Json{{"n", s.n},
              {"mean", s.mean},
              {"std_dev", s.std_dev},
              {"median", s.median},
              {"cv_percent", optional_number(s.cv_percent)},
              {"ratio_top_bottom_10", optional_number(s.ratio_top_bottom_10)},
              {"ratio_top_bottom_1", optional_number(s.ratio_top_bottom_1)},
              {"mean_over_median", optional_number(s.mean_over_median)}};
}

inline Json to_json(const GroupDecomposition& d) {
  Json groups = Json::array();
  for (const auto& g : d.groups)
    groups.push_back(Json{{"group", g.label},
                          {"n", g.n},
                          {"mean", g.mean},
                          {"weight_income", g.weight_income},
                          {"weight_pop", g.weight_pop},
                          {"theil", g.theil},
                          {"share_percent", optional_number(g.share_percent)}});
  return Json{{"n", d.n},
              {"theil", d.theil},
              {"t_wi", d.t_wi},
              {"t_bi", d.t_bi},
              {"within_percent", optional_number(d.within_percent)},
              {"between_percent", optional_number(d.between_percent)},
              {"identity_residual", d.identity_residual()},
              {"per_group", std::move(groups)}};
}

inline Json to_json(const SourceDecomposition& d) {
  Json sources = Json::array();
  for (const auto& s : d.sources)
    sources.push_back(Json{{"source", s.label}, {"mean", s.mean}, {"share", s.share}, {"theil", s.theil}});
  return Json{{"convention", std::string(to_string(d.convention))},
              {"n", d.n},
              {"mean", d.mean},
              {"theil", d.theil},
              {"t_wg", d.t_wg},
              {"t_bg", d.t_bg},
              {"delta_cor", d.delta_cor},
              {"delta_cor_literal", d.delta_cor_literal},
              {"identity_residual", d.identity_residual()},
              {"per_source", std::move(sources)}};
}

inline Json to_json(const IngestReport& r) {
  Json reasons = Json::object();
  for (const auto& [code, count] : r.reject_reasons) reasons[std::string(to_string(code))] = count;
  return Json{{"rows_read", r.rows_read},
              {"rows_accepted", r.rows_accepted},
              {"rows_rejected", r.rows_rejected},
              {"reject_reasons", std::move(reasons)}};
}

inline Json to_json(const GroupSummary& s) {
  Json rows = Json::array();
  for (const auto& r : s.rows)
    rows.push_back(Json{{"group", r.label},
                        {"n", r.n},
                        {"population_share", r.population_share},
                        {"income_share", r.income_share},
                        {"mean", r.mean}});
  return rows;
}

// --------------------------------------------------------------------------
// Synthetic population config:
//   {"n": 1000, "seed": 7, "labels": [...], "pattern_probs": [...],
//    "sources": [{"exp_mean":..,"tail_prob":..,"tail_threshold":..,"tail_alpha":..}]}
// Every key is optional; missing keys keep default_synth_config() values.

inline SynthConfig synth_config_from_json(const Json& j) {
  SynthConfig cfg = default_synth_config();
  try {
    if (j.contains("n")) cfg.n = j.at("n").get<std::size_t>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("labels")) cfg.labels = j.at("labels").get<std::vector<std::string>>();
    if (j.contains("pattern_probs")) cfg.pattern_probs = j.at("pattern_probs").get<std::vector<double>>();
    if (j.contains("sources")) {
      cfg.sources.clear();
      for (const auto& s : j.at("sources")) {
        SourceDistConfig d;
        d.exp_mean = s.at("exp_mean").get<double>();
        d.tail_prob = s.value("tail_prob", 0.0);
        d.tail_alpha = s.value("tail_alpha", 2.5);
        d.tail_threshold = s.value("tail_threshold", 10.0 * d.exp_mean);
        cfg.sources.push_back(d);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ArgumentError, std::string("synth config: ") + e.what());
  }
  return cfg;
}

inline Json to_json(const SynthConfig& cfg) {
  Json sources = Json::array();
  for (const auto& s : cfg.sources)
    sources.push_back(Json{{"exp_mean", s.exp_mean},
                           {"tail_prob", s.tail_prob},
                           {"tail_threshold", s.tail_threshold},
                           {"tail_alpha", s.tail_alpha}});
  return Json{{"n", cfg.n},
              {"seed", cfg.seed},
              {"labels", cfg.labels},
              {"pattern_probs", cfg.pattern_probs},
              {"sources", std::move(sources)}};
}

// --------------------------------------------------------------------------
// Analysis sections.

/// Per-source series are restricted to earners (amount > 0), matching how
/// per-source statistics are tabulated; totals cover every person.
inline Json descriptive_section(const Population& pop, const GroupPartition& part,
                                std::span<const double> totals, const Exec& exec) {
  Json whole = Json::object();
  for (std::size_t k = 0; k < pop.sources(); ++k) {
    const auto series = earners(pop, k);
    whole[pop.labels()[k]] = series.empty() ? Json("undefined") : to_json(descriptive_stats(series, exec));
  }
  whole["total"] = to_json(descriptive_stats(totals, exec));

  Json groups = Json::array();
  for (const auto& g : part.groups) {
    Json sources = Json::object();
    for (std::size_t k = 0; k < pop.sources(); ++k)
      if (g.id.has(k)) sources[pop.labels()[k]] = to_json(descriptive_stats(gather(pop, g.members, k), exec));
    std::vector<double> group_totals;
    group_totals.reserve(g.members.size());
    for (std::size_t j : g.members) group_totals.push_back(totals[j]);
    groups.push_back(Json{{"group", g.id.label(pop.labels())},
                          {"n", g.n},
                          {"sources", std::move(sources)},
                          {"total", to_json(descriptive_stats(group_totals, exec))}});
  }
  return Json{{"whole_population", std::move(whole)}, {"per_group", std::move(groups)}};
}

inline std::vector<std::size_t> active_sources(GroupId id, std::size_t m) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < m; ++k)
    if (id.has(k)) out.push_back(k);
  return out;
}

/// Source decomposition of one multi-source group over its active sources.
inline Json group_source_decomposition(const Population& pop, const GroupStats& g, Convention c,
                                       const Exec& exec) {
  const auto sources = active_sources(g.id, pop.sources());
  Json j = to_json(decompose_sources(pop, g.members, sources, c, exec));
  Json out{{"group", g.id.label(pop.labels())}};
  out.update(j);
  return out;
}

/// Same fields computed by the reference loops.
inline Json oracle_source_decomposition(const Population& pop, std::span<const std::size_t> rows,
                                        std::span<const std::size_t> sources, Convention c) {
  std::vector<double> matrix;
  matrix.reserve(rows.size() * sources.size());
  for (std::size_t j : rows)
    for (std::size_t k : sources) matrix.push_back(pop.amount(j, k));
  const auto r = oracle::naive_decompose_sources(matrix, sources.size(), c);
  return Json{{"convention", std::string(to_string(c))},
              {"n", rows.size()},
              {"theil", r.theil},
              {"t_wg", r.t_wg},
              {"t_bg", r.t_bg},
              {"delta_cor", r.delta_cor},
              {"identity_residual", r.theil - (r.t_wg + r.t_bg + r.delta_cor)},
              {"oracle", true}};
}

inline Json oracle_group_decomposition(const Population& pop, const GroupPartition& part) {
  std::vector<std::vector<double>> series;
  Json groups = Json::array();
  for (const auto& g : part.groups) {
    series.push_back(gather(pop, g.members));
    groups.push_back(Json{{"group", g.id.label(pop.labels())},
                          {"n", g.n},
                          {"theil", oracle::naive_theil(series.back())}});
  }
  const auto r = oracle::naive_decompose_disjoint(series);
  Json out{{"n", part.n}, {"theil", r.theil}, {"t_wi", r.t_wi}, {"t_bi", r.t_bi}};
  if (r.theil > 0.0) {
    out["within_percent"] = 100.0 * r.t_wi / r.theil;
    out["between_percent"] = 100.0 * r.t_bi / r.theil;
  } else {
    out["within_percent"] = "undefined";
    out["between_percent"] = "undefined";
  }
  out["identity_residual"] = r.theil - (r.t_wi + r.t_bi);
  out["per_group"] = std::move(groups);
  out["oracle"] = true;
  return out;
}

/// Concentration ratios for every q: {"1": r, "10": r}.
inline Json ratio_entry(std::span<const double> series, std::span<const double> qs) {
  Json out = Json::object();
  for (double q : qs) out[fmt_double(q)] = optional_number(top_bottom_ratio(series, q));
  return out;
}

inline Json ratios_section(const Population& pop, const GroupPartition& part,
                           std::span<const double> totals, std::span<const double> qs) {
  Json whole = Json::object();
  for (std::size_t k = 0; k < pop.sources(); ++k) {
    const auto series = earners(pop, k);
    whole[pop.labels()[k]] = series.empty() ? Json("undefined") : ratio_entry(series, qs);
  }
  whole["total"] = ratio_entry(totals, qs);
  Json groups = Json::array();
  for (const auto& g : part.groups) {
    Json entry{{"group", g.id.label(pop.labels())}};
    for (std::size_t k = 0; k < pop.sources(); ++k)
      if (g.id.has(k)) entry[pop.labels()[k]] = ratio_entry(gather(pop, g.members, k), qs);
    std::vector<double> group_totals;
    for (std::size_t j : g.members) group_totals.push_back(totals[j]);
    entry["total"] = ratio_entry(group_totals, qs);
    groups.push_back(std::move(entry));
  }
  Json qlist = Json::array();
  for (double q : qs) qlist.push_back(q);
  return Json{{"q", std::move(qlist)}, {"whole_population", std::move(whole)}, {"per_group", std::move(groups)}};
}

struct AnalyzeOptions {
  Convention convention = Convention::table4;
  Exec exec;
};

/// Full pipeline over a loaded population: descriptive statistics per source
/// and group, Theil per group, the disjoint-group decomposition, and a source
/// decomposition for every multi-source group.
inline Json analyze(const Population& pop, const AnalyzeOptions& opts = {}) {
  const Exec& exec = opts.exec;
  const auto part = partition(pop, exec);
  const auto totals = pop.totals(exec);

  const auto groups = decompose_disjoint(pop, part, exec);
  Json theil_section{{"whole_population", groups.theil}};
  Json per_group = Json::array();
  for (const auto& g : groups.groups) per_group.push_back(Json{{"group", g.label}, {"theil", g.theil}});
  theil_section["per_group"] = std::move(per_group);

  Json by_source = Json::array();
  for (const auto& g : part.groups)
    if (g.id.source_count() >= 2) by_source.push_back(group_source_decomposition(pop, g, opts.convention, exec));

  return Json{{"group_summary", to_json(group_summary(part, pop.labels()))},
              {"descriptive", descriptive_section(pop, part, totals, exec)},
              {"theil", std::move(theil_section)},
              {"group_decomposition", to_json(groups)},
              {"source_decomposition", std::move(by_source)}};
}

}  // namespace ineq
