#pragma once

// Command-line front end. Exit status: 0 success, 1 data or validation
// error, 2 usage error.

#include <cerrno>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ineq/ingest.hpp"
#include "ineq/report.hpp"
#include "ineq/stats.hpp"
#include "ineq/synth.hpp"
#include "ineq/theil.hpp"

#ifndef INEQ_VERSION
#define INEQ_VERSION "0.0.0"
#endif

namespace ineq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Writes to `path`, or to `fallback` when the path is empty.
template <class Writer>
void emit(const std::string& path, std::ostream& fallback, Writer&& write) {
  if (path.empty() || path == "-") {
    write(fallback);
    fallback.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  write(out);
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

inline void emit_json(const std::string& path, std::ostream& fallback, const Json& j) {
  emit(path, fallback, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

/// Resolves "G4", a canonical ordinal ("4"), or a "{a+b}" label.
inline GroupId parse_group(const std::string& text, const std::vector<std::string>& labels) {
  const std::size_t m = labels.size();
  const std::size_t patterns = (std::size_t{1} << m) - 1;
  std::string digits = text;
  if (!digits.empty() && (digits[0] == 'G' || digits[0] == 'g')) digits.erase(0, 1);
  if (!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos) {
    const auto ordinal = std::stoul(digits);
    if (ordinal >= 1 && ordinal <= patterns) return GroupId::from_ordinal(ordinal, m);
  }
  for (std::size_t ordinal = 1; ordinal <= patterns; ++ordinal) {
    const auto id = GroupId::from_ordinal(ordinal, m);
    if (id.label(labels) == text) return id;
  }
  throw UsageError("unknown group '" + text + "'");
}

inline std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("--range must be LO:HI");
  try {
    std::size_t used = 0;
    const double lo = std::stod(text.substr(0, colon), &used);
    if (used != colon) throw UsageError("--range must be LO:HI");
    const std::string rest = text.substr(colon + 1);
    const double hi = std::stod(rest, &used);
    if (used != rest.size()) throw UsageError("--range must be LO:HI");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw UsageError("--range must be LO:HI");
  }
}

struct Options {
  unsigned threads = 1;
  bool oracle = false;
  std::string input;
  std::string output;
  std::string convention = "table4";
  std::string group;
  bool all = false;
  std::vector<double> qs{1.0, 10.0};
  std::string source;
  double bin_width = 0.0;
  std::string range;
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> seed;
  std::string config;
};

inline Json metadata(const Options& o, const Population& pop, const IngestReport& ingest,
                     const std::string& command) {
  return Json{{"command", command},
              {"input", o.input},
              {"n", pop.size()},
              {"m", pop.sources()},
              {"sources", pop.labels()},
              {"timestamp", utc_timestamp()},
              {"tool_version", INEQ_VERSION},
              {"convention", o.convention},
              {"ingest", to_json(ingest)}};
}

inline int run_analyze(const Options& o, const Exec& exec, std::ostream& out) {
  const auto loaded = load_population(o.input);
  AnalyzeOptions opts{parse_convention(o.convention), exec};
  Json report{{"metadata", metadata(o, loaded.population, loaded.report, "analyze")}};
  report.update(analyze(loaded.population, opts));
  emit_json(o.output, out, report);
  return kExitOk;
}

inline int run_decompose_groups(const Options& o, const Exec& exec, std::ostream& out) {
  const auto loaded = load_population(o.input);
  const auto& pop = loaded.population;
  const auto part = partition(pop, exec);
  Json report{{"metadata", metadata(o, pop, loaded.report, "decompose-groups")}};
  report["group_decomposition"] =
      o.oracle ? oracle_group_decomposition(pop, part) : to_json(decompose_disjoint(pop, part, exec));
  emit_json(o.output, out, report);
  return kExitOk;
}

inline int run_decompose_sources(const Options& o, const Exec& exec, std::ostream& out) {
  if (o.all && !o.group.empty()) throw UsageError("--group and --all are mutually exclusive");
  const auto convention = parse_convention(o.convention);
  const auto loaded = load_population(o.input);
  const auto& pop = loaded.population;
  Json report{{"metadata", metadata(o, pop, loaded.report, "decompose-sources")}};

  auto one = [&](std::span<const std::size_t> rows, std::span<const std::size_t> sources) {
    if (o.oracle) return oracle_source_decomposition(pop, rows, sources, convention);
    auto d = decompose_sources(pop, rows, sources, convention, exec);
    return to_json(d);
  };

  Json results = Json::array();
  if (o.all) {
    std::vector<std::size_t> rows(pop.size());
    for (std::size_t j = 0; j < rows.size(); ++j) rows[j] = j;
    std::vector<std::size_t> sources(pop.sources());
    for (std::size_t k = 0; k < sources.size(); ++k) sources[k] = k;
    Json entry{{"group", "all"}};
    entry.update(one(rows, sources));
    results.push_back(std::move(entry));
  } else {
    const auto part = partition(pop, exec);
    std::optional<GroupId> wanted;
    if (!o.group.empty()) wanted = parse_group(o.group, pop.labels());
    for (const auto& g : part.groups) {
      if (wanted ? g.id != *wanted : g.id.source_count() < 2) continue;
      const auto sources = active_sources(g.id, pop.sources());
      if (sources.size() < 2)
        throw Error(ErrorCode::ArgumentError, "group " + o.group + " has a single income source");
      Json entry{{"group", g.id.label(pop.labels())}};
      entry.update(one(g.members, sources));
      results.push_back(std::move(entry));
    }
    if (wanted && results.empty())
      throw Error(ErrorCode::ArgumentError, "group " + o.group + " has no members");
  }
  report["source_decomposition"] = std::move(results);
  emit_json(o.output, out, report);
  return kExitOk;
}

inline int run_ratios(const Options& o, const Exec& exec, std::ostream& out) {
  for (double q : o.qs)
    if (!(q > 0.0 && q <= 50.0)) throw UsageError("--q values must be in (0, 50]");
  const auto loaded = load_population(o.input);
  const auto& pop = loaded.population;
  const auto part = partition(pop, exec);
  const auto totals = pop.totals(exec);
  Json report{{"metadata", metadata(o, pop, loaded.report, "ratios")}};
  report["ratios"] = ratios_section(pop, part, totals, o.qs);
  emit_json(o.output, out, report);
  return kExitOk;
}

inline int run_histogram(const Options& o, const Exec& exec, std::ostream& out) {
  const auto [lo, hi] = parse_range(o.range);
  if (!(o.bin_width > 0.0)) throw UsageError("--bin-width must be positive");
  if (!(lo < hi)) throw UsageError("--range needs LO < HI");
  const auto loaded = load_population(o.input);
  const auto& pop = loaded.population;
  std::vector<double> series;
  if (o.source == "total") {
    series = pop.totals(exec);
  } else {
    const auto k = pop.source_index(o.source);
    if (!k) throw UsageError("unknown source '" + o.source + "'");
    series = earners(pop, *k);
  }
  const auto h = histogram(series, o.bin_width, lo, hi);
  emit(o.output, out, [&](std::ostream& os) { write_csv(os, h); });
  return kExitOk;
}

inline int run_synth(const Options& o, const Exec& exec, std::ostream& out) {
  SynthConfig cfg = default_synth_config();
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + o.config + "'");
    Json j;
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ArgumentError, std::string("config is not valid JSON: ") + e.what());
    }
    cfg = synth_config_from_json(j);
  }
  if (o.n) cfg.n = *o.n;
  if (o.seed) cfg.seed = *o.seed;
  const auto pop = generate_population(cfg, exec);
  emit(o.output, out, [&](std::ostream& os) { write_csv(os, pop, exec); });
  return kExitOk;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Income inequality statistics and Theil decompositions", "ineq"};
  app.set_version_flag("--version", INEQ_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--threads", o.threads, "Worker threads (INEQ_THREADS overrides)")
      ->check(CLI::PositiveNumber);

  auto add_io = [&](CLI::App* sub) {
    sub->add_option("--input", o.input, "Income CSV ('-' for stdin)")->required();
    sub->add_option("--output", o.output, "Output file (default stdout)");
    sub->add_flag("--oracle", o.oracle, "Use the reference implementations")->group("");
  };

  auto* analyze_cmd = app.add_subcommand("analyze", "Full report: statistics, Theil, both decompositions");
  add_io(analyze_cmd);
  analyze_cmd->add_option("--convention", o.convention, "literal | table4")
      ->check(CLI::IsMember({"literal", "table4"}));

  auto* groups_cmd = app.add_subcommand("decompose-groups", "Within/between decomposition over source-pattern groups");
  add_io(groups_cmd);

  auto* sources_cmd = app.add_subcommand("decompose-sources", "Decomposition by income source");
  add_io(sources_cmd);
  sources_cmd->add_option("--group", o.group, "Group (e.g. G4); default: every multi-source group");
  sources_cmd->add_flag("--all", o.all, "Pool every person and every source");
  sources_cmd->add_option("--convention", o.convention, "literal | table4")
      ->check(CLI::IsMember({"literal", "table4"}));

  auto* ratios_cmd = app.add_subcommand("ratios", "Top-q / bottom-q concentration ratios");
  add_io(ratios_cmd);
  ratios_cmd->add_option("--q", o.qs, "Percent levels, comma separated")->delimiter(',');

  auto* hist_cmd = app.add_subcommand("histogram", "Histogram of one source (earners) or of totals, as CSV");
  add_io(hist_cmd);
  hist_cmd->add_option("--source", o.source, "Source label or 'total'")->required();
  hist_cmd->add_option("--bin-width", o.bin_width, "Bin width")->required();
  hist_cmd->add_option("--range", o.range, "LO:HI, half open")->required();

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic population CSV");
  synth_cmd->add_option("--n", o.n, "Record count")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", o.seed, "64-bit seed");
  synth_cmd->add_option("--config", o.config, "JSON generator config");
  synth_cmd->add_option("--output", o.output, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << INEQ_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  const Exec exec = Exec::from_env(o.threads);
  try {
    if (analyze_cmd->parsed()) return run_analyze(o, exec, out);
    if (groups_cmd->parsed()) return run_decompose_groups(o, exec, out);
    if (sources_cmd->parsed()) return run_decompose_sources(o, exec, out);
    if (ratios_cmd->parsed()) return run_ratios(o, exec, out);
    if (hist_cmd->parsed()) return run_histogram(o, exec, out);
    if (synth_cmd->parsed()) return run_synth(o, exec, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace ineq::cli
