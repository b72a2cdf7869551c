// Command-line frontend: synthetic data generation, changepoint extraction,
// per-pair correlation, parameter sweeps, and traceroute validation.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include "CLI11.hpp"
#include "bgprtt/aggregate.hpp"
#include "bgprtt/format.hpp"
#include "bgprtt/ingest.hpp"
#include "bgprtt/pipeline.hpp"
#include "bgprtt/synth.hpp"
#include "bgprtt/validate.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace bgprtt;

namespace {

/// Raised for bad parameters, scenarios, or flag combinations (exit 1);
/// plain Error means broken input data (exit 2).
struct UsageError : Error {
  using Error::Error;
};

struct ParamFlags {
  std::string params_file;
  std::optional<Timestamp> window_start;
  std::optional<Timestamp> window_end;
  std::optional<std::int64_t> time_shift;
  std::optional<double> est;
  std::optional<std::int64_t> tolerance;
  std::optional<double> penalty_base;
  std::optional<double> penalty_offset;
  std::optional<double> initial_penalty;
  std::optional<std::int64_t> rtt_period;
};

void add_param_flags(CLI::App* cmd, ParamFlags& f, bool with_grid_axes = true) {
  cmd->add_option("--params", f.params_file,
                  "JSON file with parameter defaults; flags override it");
  cmd->add_option("--window-start", f.window_start,
                  "Time window start, epoch seconds (inclusive)");
  cmd->add_option("--window-end", f.window_end,
                  "Time window end, epoch seconds (inclusive)");
  if (with_grid_axes) {
    cmd->add_option("--shift", f.time_shift,
                    "Time shift applied to RTT timestamps, seconds");
    cmd->add_option("--est", f.est, "Elbow slope threshold");
  }
  cmd->add_option("--tolerance", f.tolerance, "Tolerance window, seconds");
  cmd->add_option("--penalty-base", f.penalty_base,
                  "Base c1 of the penalty schedule c1^i + c2");
  cmd->add_option("--penalty-offset", f.penalty_offset,
                  "Offset c2 of the penalty schedule");
  cmd->add_option("--initial-penalty", f.initial_penalty,
                  "First penalty p0 of the schedule");
  cmd->add_option("--rtt-period", f.rtt_period,
                  "Seconds between consecutive RTT measurements");
}

Params load_params_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot open params file '" + file + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw UsageError("params file '" + file + "' is not a JSON object");
  Params p;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "window_start")
        p.time_window.start = value.get<Timestamp>();
      else if (key == "window_end")
        p.time_window.end = value.get<Timestamp>();
      else if (key == "time_shift")
        p.time_shift = value.get<std::int64_t>();
      else if (key == "elbow_slope_threshold" || key == "est")
        p.elbow_slope_threshold = value.get<double>();
      else if (key == "tolerance_window")
        p.tolerance_window = value.get<std::int64_t>();
      else if (key == "penalty_base")
        p.penalty_base = value.get<double>();
      else if (key == "penalty_offset")
        p.penalty_offset = value.get<double>();
      else if (key == "initial_penalty")
        p.initial_penalty = value.get<double>();
      else if (key == "rtt_period")
        p.rtt_period = value.get<std::int64_t>();
      else
        throw UsageError("params file: unknown key '" + key + "'");
    } catch (const nlohmann::json::exception&) {
      throw UsageError("params file: bad value for key '" + key + "'");
    }
  }
  return p;
}

Params resolve_params(const ParamFlags& f) {
  Params p;
  if (!f.params_file.empty()) p = load_params_file(f.params_file);
  if (f.window_start) p.time_window.start = *f.window_start;
  if (f.window_end) p.time_window.end = *f.window_end;
  if (f.time_shift) p.time_shift = *f.time_shift;
  if (f.est) p.elbow_slope_threshold = *f.est;
  if (f.tolerance) p.tolerance_window = *f.tolerance;
  if (f.penalty_base) p.penalty_base = *f.penalty_base;
  if (f.penalty_offset) p.penalty_offset = *f.penalty_offset;
  if (f.initial_penalty) p.initial_penalty = *f.initial_penalty;
  if (f.rtt_period) p.rtt_period = *f.rtt_period;
  try {
    p.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return p;
}

Ipv4 parse_target(const std::string& text) {
  try {
    return Ipv4::parse(text);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

std::vector<Ipv4Prefix> parse_prefixes(const std::vector<std::string>& texts) {
  std::vector<Ipv4Prefix> out;
  for (const auto& t : texts) {
    try {
      out.push_back(Ipv4Prefix::parse(t));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

std::string sanitize(const std::string& name) {
  std::string out = name;
  std::replace(out.begin(), out.end(), '/', '_');
  return out;
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("cannot open '" + file.string() + "' for writing");
  return out;
}

std::vector<std::string> sorted_probe_ids(
    std::span<const RttMeasurement> rtt, Ipv4 target,
    const std::vector<std::string>& requested) {
  std::set<std::string> ids;
  for (const auto& m : rtt)
    if (m.target == target) ids.insert(m.probe_id);
  std::vector<std::string> out;
  if (requested.empty()) {
    out.assign(ids.begin(), ids.end());
  } else {
    out = requested;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

std::vector<std::string> sorted_cp_ids(
    std::span<const BgpUpdate> bgp, std::span<const Ipv4Prefix> prefixes,
    const std::vector<std::string>& requested) {
  std::set<std::string> ids;
  for (const auto& u : bgp)
    for (const auto& p : prefixes)
      if (u.prefix == p) ids.insert(u.cp_id);
  std::vector<std::string> out;
  if (requested.empty()) {
    out.assign(ids.begin(), ids.end());
  } else {
    out = requested;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  if (jobs < 1) jobs = 1;
  const auto workers =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string scenario_file;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs& args) {
  synth::Scenario scenario;
  try {
    scenario = synth::Scenario::from_json_file(args.scenario_file);
    if (args.seed) scenario.seed = *args.seed;
    scenario.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const auto data = synth::generate(scenario);
  const auto files = synth::write_files(data, args.out_dir);
  std::cout << files.rtt.string() << '\n'
            << files.bgp.string() << '\n'
            << files.traceroute.string() << '\n'
            << files.ground_truth.string() << '\n'
            << files.prefix_table.string() << '\n'
            << files.ixp_list.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// changepoints

struct ChangepointArgs {
  std::string rtt_file;
  std::string probe;
  std::string target;
  std::string out_file = "changepoints.csv";
  std::string elbow_file;
  ParamFlags params;
};

int cmd_changepoints(const ChangepointArgs& args) {
  const Params params = resolve_params(args.params);
  const Ipv4 target = parse_target(args.target);

  const auto rtt = ingest::read_rtt(args.rtt_file);
  std::vector<RttMeasurement> mine;
  for (const auto& m : rtt)
    if (m.probe_id == args.probe && m.target == target) mine.push_back(m);
  mine = ingest::clip_window(mine, params.time_window);
  const auto samples = pipeline::time_align(
      pipeline::preprocess_rtt(mine, target), params.time_shift);

  std::vector<Changepoint> cps;
  changepoint::ElbowTrace trace;
  if (!samples.empty()) {
    std::vector<double> values;
    for (const auto& s : samples) values.push_back(s.value);
    changepoint::PeltCache cache(std::move(values));
    auto sel = changepoint::elbow_select(cache, params);
    trace = std::move(sel.trace);
    cps = changepoint::to_changepoints(samples, cache.run(sel.penalty));
  }

  auto out = open_out(args.out_file);
  out << "timestamp,index,mean_before,mean_after\n";
  for (const auto& c : cps)
    out << c.timestamp << ',' << c.index << ',' << format_double(c.mean_before)
        << ',' << format_double(c.mean_after) << '\n';

  if (!args.elbow_file.empty()) {
    auto eout = open_out(args.elbow_file);
    eout << "iteration,penalty,changepoints,delta\n";
    for (const auto& row : trace.rows) {
      eout << row.iteration << ',' << format_double(row.penalty) << ','
           << row.changepoint_count << ',';
      if (row.difference_quotient)
        eout << format_double(*row.difference_quotient);
      eout << '\n';
    }
    if (trace.guard_triggered)
      std::cerr << "note: changepoint count reached zero before the elbow "
                   "criterion fired\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// correlate

struct CorrelateArgs {
  std::string rtt_file;
  std::string bgp_file;
  std::string target;
  std::vector<std::string> prefixes;
  std::vector<std::string> probes;
  std::vector<std::string> cps;
  std::string out_dir = ".";
  bool common_cps = false;
  bool emit_cdf = false;
  bool emit_timeline = false;
  bool emit_classes = false;
  double jaccard_threshold = 0.7;
  int jobs = 1;
  ParamFlags params;
};

int cmd_correlate(const CorrelateArgs& args) {
  const Params params = resolve_params(args.params);
  const Ipv4 target = parse_target(args.target);
  const auto prefixes = parse_prefixes(args.prefixes);
  if (!(args.jaccard_threshold >= 0.0 && args.jaccard_threshold <= 1.0))
    throw UsageError("--jaccard-threshold must lie in [0,1]");

  const auto rtt = ingest::read_rtt(args.rtt_file);
  const auto bgp = ingest::read_bgp(args.bgp_file);

  const auto probes = sorted_probe_ids(rtt, target, args.probes);
  auto cps = sorted_cp_ids(bgp, prefixes, args.cps);

  if (args.common_cps && prefixes.size() > 1) {
    // Keep only CPs that recorded updates for every requested prefix
    // inside the time window.
    std::vector<std::string> kept;
    for (const auto& cp : cps) {
      bool all = true;
      for (const auto& prefix : prefixes) {
        std::vector<BgpUpdate> mine;
        for (const auto& u : bgp)
          if (u.cp_id == cp && u.prefix == prefix) mine.push_back(u);
        if (ingest::clip_window(mine, params.time_window).empty()) {
          all = false;
          break;
        }
      }
      if (all) kept.push_back(cp);
    }
    cps = kept;
  }

  fs::create_directories(args.out_dir);
  const fs::path out_dir(args.out_dir);

  struct PairKey {
    std::string probe, cp;
    Ipv4Prefix prefix;
  };
  std::vector<PairKey> keys;
  for (const auto& probe : probes)
    for (const auto& cp : cps)
      for (const auto& prefix : prefixes) keys.push_back({probe, cp, prefix});

  std::vector<pipeline::PairResult> results(keys.size());
  parallel_for(keys.size(), args.jobs, [&](std::size_t i) {
    results[i] = pipeline::run_pair(rtt, bgp, keys[i].probe, keys[i].cp,
                                    target, keys[i].prefix, params);
  });

  auto summary = open_out(out_dir / "summary.csv");
  summary << "probe,cp,target,prefix,valid,matched,factor,insufficient\n";
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& r = results[i].report;
    std::size_t matched = 0;
    for (const auto& e : r.entries) matched += e.matched ? 1 : 0;
    summary << r.probe_id << ',' << r.cp_id << ',' << r.target.str() << ','
            << r.prefix.str() << ',' << r.entries.size() << ',' << matched
            << ',' << format_double(r.correlation_factor) << ','
            << (r.insufficient_data ? 'Y' : 'N') << '\n';

    auto rep = open_out(out_dir / ("report_" + sanitize(r.probe_id) + "_" +
                                   sanitize(r.cp_id) + "_" +
                                   sanitize(r.prefix.str()) + ".json"));
    pipeline::write_match_report_json(rep, results[i], params);
  }
  // With no collector peers at all, still surface one row per probe so the
  // lack of data is visible rather than silent.
  if (cps.empty()) {
    for (const auto& probe : probes)
      summary << probe << ",-," << target.str() << ','
              << (prefixes.empty() ? "-" : prefixes.front().str())
              << ",0,0,0,Y\n";
  }

  if (args.emit_cdf) {
    auto out = open_out(out_dir / "cdf.csv");
    out << "prefix,x,F\n";
    for (const auto& prefix : prefixes) {
      std::vector<double> factors;
      for (std::size_t i = 0; i < keys.size(); ++i)
        if (keys[i].prefix == prefix && !results[i].report.insufficient_data)
          factors.push_back(results[i].report.correlation_factor);
      if (factors.empty()) continue;
      aggregate::write_cdf_csv(out, prefix.str(),
                               aggregate::Cdf(std::move(factors)));
    }
  }

  if (args.emit_timeline) {
    std::vector<MatchReport> reports;
    for (const auto& r : results) reports.push_back(r.report);
    const auto rows = aggregate::emit_match_timeline(reports);
    auto out = open_out(out_dir / "timeline.csv");
    aggregate::write_timeline_csv(out, rows);
  }

  if (args.emit_classes) {
    auto out = open_out(out_dir / "classes.json");
    for (const auto& cp : cps) {
      for (const auto& prefix : prefixes) {
        std::vector<MatchReport> group;
        for (std::size_t i = 0; i < keys.size(); ++i)
          if (keys[i].cp == cp && keys[i].prefix == prefix)
            group.push_back(results[i].report);
        if (group.empty()) continue;
        const auto classing =
            aggregate::equivalence_classes(group, args.jaccard_threshold);
        aggregate::write_classes_json(out, cp, prefix.str(), classing);
      }
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string rtt_file;
  std::string bgp_file;
  std::string target;
  std::vector<std::string> prefixes;
  std::vector<std::string> probes;
  std::vector<std::string> cps;
  std::vector<double> est_values;
  std::vector<std::int64_t> shift_values;
  std::string out_file = "surface.csv";
  ParamFlags params;
};

int cmd_sweep(const SweepArgs& args) {
  const Params params = resolve_params(args.params);
  const Ipv4 target = parse_target(args.target);
  const auto prefixes = parse_prefixes(args.prefixes);

  const auto est_values =
      args.est_values.empty() ? aggregate::default_est_grid() : args.est_values;
  const auto shift_values = args.shift_values.empty()
                                ? aggregate::default_shift_grid()
                                : args.shift_values;
  for (double est : est_values)
    if (est <= 0.0) throw UsageError("--est values must be positive");

  const auto rtt = ingest::read_rtt(args.rtt_file);
  const auto bgp = ingest::read_bgp(args.bgp_file);
  const auto probes = sorted_probe_ids(rtt, target, args.probes);
  const auto cps = sorted_cp_ids(bgp, prefixes, args.cps);

  std::vector<aggregate::PairData> pairs;
  for (const auto& probe : probes) {
    std::vector<RttMeasurement> mine;
    for (const auto& m : rtt)
      if (m.probe_id == probe && m.target == target) mine.push_back(m);
    for (const auto& cp : cps) {
      aggregate::PairData pd;
      pd.probe_id = probe;
      pd.cp_id = cp;
      pd.rtt = mine;
      for (const auto& u : bgp)
        if (u.cp_id == cp) pd.bgp.push_back(u);
      pairs.push_back(std::move(pd));
    }
  }

  const auto surfaces =
      aggregate::sweep(pairs, target, prefixes, est_values, shift_values, params);
  auto out = open_out(args.out_file);
  aggregate::write_surface_csv(out, surfaces, est_values, shift_values);
  return 0;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateArgs {
  std::string rtt_file;
  std::string bgp_file;
  std::string traceroute_file;
  std::string prefix_table_file;
  std::string ixp_file;
  std::uint32_t probe_as = 0;
  std::string target;
  std::string prefix;
  std::vector<std::string> probes;
  std::vector<std::string> cps;
  std::string out_dir = ".";
  int jobs = 1;
  ParamFlags params;
};

int cmd_validate(const ValidateArgs& args) {
  const Params params = resolve_params(args.params);
  const Ipv4 target = parse_target(args.target);
  const auto prefixes = parse_prefixes({args.prefix});
  if (args.probe_as == 0) throw UsageError("--probe-as must be a positive AS number");

  const auto rtt = ingest::read_rtt(args.rtt_file);
  const auto bgp = ingest::read_bgp(args.bgp_file);
  const auto traceroutes = ingest::read_traceroute(args.traceroute_file);
  const auto rows = ingest::read_prefix_table(args.prefix_table_file);
  std::vector<Asn> ixp;
  if (!args.ixp_file.empty()) ixp = ingest::read_ixp_list(args.ixp_file);
  const validate::PrefixTable table(rows, ixp, args.probe_as);

  const auto probes = sorted_probe_ids(rtt, target, args.probes);
  const auto cps = sorted_cp_ids(bgp, prefixes, args.cps);

  struct PairKey {
    std::string probe, cp;
  };
  std::vector<PairKey> keys;
  for (const auto& probe : probes)
    for (const auto& cp : cps) keys.push_back({probe, cp});

  std::vector<validate::ValidationRow> csv_rows(keys.size());
  std::vector<validate::ValidationReport> reports(keys.size());
  parallel_for(keys.size(), args.jobs, [&](std::size_t i) {
    const auto result = pipeline::run_pair(rtt, bgp, keys[i].probe, keys[i].cp,
                                           target, prefixes.front(), params);
    std::vector<TracerouteMeasurement> mine;
    for (const auto& t : traceroutes)
      if (t.probe_id == keys[i].probe && t.target == target)
        mine.push_back(t);
    mine = ingest::clip_window(mine, params.time_window);
    const auto quads = validate::build_quadruples(result.updates, mine, table,
                                                  params.time_shift);
    reports[i] = validate::validate_pair(quads, result.report);
    csv_rows[i] = {keys[i].probe,
                   keys[i].cp,
                   result.report.correlation_factor,
                   reports[i].bgp_traceroute_correlation,
                   reports[i].bgp_traceroute_false_negative,
                   reports[i].q_plus_size,
                   reports[i].q_minus_size};
  });

  fs::create_directories(args.out_dir);
  const fs::path out_dir(args.out_dir);
  auto out = open_out(out_dir / "validation.csv");
  validate::write_validation_csv(out, csv_rows);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto rep = open_out(out_dir / ("validation_" + sanitize(keys[i].probe) +
                                   "_" + sanitize(keys[i].cp) + ".json"));
    validate::write_validation_report_json(rep, reports[i]);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Correlates interdomain routing changes with round-trip-time "
      "variations and validates the matches against traceroute paths"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand(
      "synth", "Generate a seeded synthetic scenario with ground truth");
  synth_cmd->add_option("--scenario", synth_args.scenario_file,
                        "Scenario JSON file")
      ->required();
  synth_cmd->add_option("--out", synth_args.out_dir, "Output directory");
  synth_cmd->add_option("--seed", synth_args.seed,
                        "Override the scenario seed");

  ChangepointArgs cp_args;
  auto* cp_cmd = app.add_subcommand(
      "changepoints", "Detect RTT changepoints for one probe and target");
  cp_cmd->add_option("--rtt", cp_args.rtt_file, "RTT NDJSON file")->required();
  cp_cmd->add_option("--probe", cp_args.probe, "Probe id")->required();
  cp_cmd->add_option("--target", cp_args.target, "Target IPv4 address")
      ->required();
  cp_cmd->add_option("--out", cp_args.out_file, "Changepoint CSV output");
  cp_cmd->add_option("--emit-elbow", cp_args.elbow_file,
                     "Also write the elbow trace CSV here");
  add_param_flags(cp_cmd, cp_args.params);

  CorrelateArgs corr_args;
  auto* corr_cmd = app.add_subcommand(
      "correlate", "Per-pair matching and correlation factors");
  corr_cmd->add_option("--rtt", corr_args.rtt_file, "RTT NDJSON file")
      ->required();
  corr_cmd->add_option("--bgp", corr_args.bgp_file, "BGP NDJSON file")
      ->required();
  corr_cmd->add_option("--target", corr_args.target, "Target IPv4 address")
      ->required();
  corr_cmd->add_option("--prefix", corr_args.prefixes,
                       "CIDR prefix (repeatable)")
      ->required();
  corr_cmd->add_option("--probe", corr_args.probes,
                       "Restrict to these probes (repeatable)");
  corr_cmd->add_option("--cp", corr_args.cps,
                       "Restrict to these collector peers (repeatable)");
  corr_cmd->add_option("--out", corr_args.out_dir, "Output directory");
  corr_cmd->add_flag("--common-cps", corr_args.common_cps,
                     "Keep only CPs with updates for every prefix");
  corr_cmd->add_flag("--emit-cdf", corr_args.emit_cdf,
                     "Write per-prefix factor CDFs (cdf.csv)");
  corr_cmd->add_flag("--emit-timeline", corr_args.emit_timeline,
                     "Write the per-update match timeline (timeline.csv)");
  corr_cmd->add_flag("--emit-classes", corr_args.emit_classes,
                     "Write probe equivalence classes (classes.json)");
  corr_cmd->add_option("--jaccard-threshold", corr_args.jaccard_threshold,
                       "Similarity threshold for equivalence classes");
  corr_cmd->add_option("--jobs", corr_args.jobs, "Worker threads");
  add_param_flags(corr_cmd, corr_args.params);

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Correlation-score surfaces over the EST x time-shift grid");
  sweep_cmd->add_option("--rtt", sweep_args.rtt_file, "RTT NDJSON file")
      ->required();
  sweep_cmd->add_option("--bgp", sweep_args.bgp_file, "BGP NDJSON file")
      ->required();
  sweep_cmd->add_option("--target", sweep_args.target, "Target IPv4 address")
      ->required();
  sweep_cmd->add_option("--prefix", sweep_args.prefixes,
                        "CIDR prefix (repeatable)")
      ->required();
  sweep_cmd->add_option("--probe", sweep_args.probes,
                        "Restrict to these probes (repeatable)");
  sweep_cmd->add_option("--cp", sweep_args.cps,
                        "Restrict to these collector peers (repeatable)");
  sweep_cmd->add_option("--est", sweep_args.est_values,
                        "Elbow slope threshold grid (repeatable)");
  sweep_cmd->add_option("--shift", sweep_args.shift_values,
                        "Time shift grid in seconds (repeatable)");
  sweep_cmd->add_option("--out", sweep_args.out_file, "Surface CSV output");
  add_param_flags(sweep_cmd, sweep_args.params, /*with_grid_axes=*/false);

  ValidateArgs val_args;
  auto* val_cmd = app.add_subcommand(
      "validate", "Traceroute-based validation of the correlation");
  val_cmd->add_option("--rtt", val_args.rtt_file, "RTT NDJSON file")
      ->required();
  val_cmd->add_option("--bgp", val_args.bgp_file, "BGP NDJSON file")
      ->required();
  val_cmd->add_option("--traceroute", val_args.traceroute_file,
                      "Traceroute NDJSON file")
      ->required();
  val_cmd->add_option("--prefix-table", val_args.prefix_table_file,
                      "Prefix origin table CSV")
      ->required();
  val_cmd->add_option("--ixp-list", val_args.ixp_file,
                      "File with one IXP AS number per line");
  val_cmd->add_option("--probe-as", val_args.probe_as,
                      "AS number of the probe's network")
      ->required();
  val_cmd->add_option("--target", val_args.target, "Target IPv4 address")
      ->required();
  val_cmd->add_option("--prefix", val_args.prefix, "CIDR prefix")->required();
  val_cmd->add_option("--probe", val_args.probes,
                      "Restrict to these probes (repeatable)");
  val_cmd->add_option("--cp", val_args.cps,
                      "Restrict to these collector peers (repeatable)");
  val_cmd->add_option("--out", val_args.out_dir, "Output directory");
  val_cmd->add_option("--jobs", val_args.jobs, "Worker threads");
  add_param_flags(val_cmd, val_args.params);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth_args);
    if (cp_cmd->parsed()) return cmd_changepoints(cp_args);
    if (corr_cmd->parsed()) return cmd_correlate(corr_args);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_args);
    if (val_cmd->parsed()) return cmd_validate(val_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
