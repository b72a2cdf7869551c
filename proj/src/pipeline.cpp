#include "bgprtt/pipeline.hpp"

#include <algorithm>
#include <ostream>

#include "bgprtt/ingest.hpp"
#include "json.hpp"

namespace bgprtt::pipeline {

std::vector<RttSample> preprocess_rtt(std::span<const RttMeasurement> ms,
                                      Ipv4 expected_ip) {
  std::vector<RttSample> out;
  for (const auto& m : ms) {
    if (m.rtts.size() != 3) continue;
    if (!m.responded_ip || *m.responded_ip != expected_ip) continue;
    out.push_back({m.timestamp, std::min({m.rtts[0], m.rtts[1], m.rtts[2]})});
  }
  return out;
}

std::vector<RttSample> time_align(std::vector<RttSample> samples,
                                  std::int64_t shift) {
  for (auto& s : samples) {
    if (s.timestamp + shift < 0)
      throw Error("time_align: shift moves a timestamp before the epoch");
    s.timestamp += shift;
  }
  return samples;
}

std::vector<BgpUpdate> FlaggedUpdates::valid_updates() const {
  std::vector<BgpUpdate> out;
  for (std::size_t i = 0; i < updates.size(); ++i)
    if (valid[i]) out.push_back(updates[i]);
  return out;
}

std::vector<BgpUpdate> FlaggedUpdates::invalid_updates() const {
  std::vector<BgpUpdate> out;
  for (std::size_t i = 0; i < updates.size(); ++i)
    if (!valid[i]) out.push_back(updates[i]);
  return out;
}

std::size_t FlaggedUpdates::valid_count() const {
  return static_cast<std::size_t>(
      std::count(valid.begin(), valid.end(), true));
}

FlaggedUpdates preprocess_bgp(std::vector<BgpUpdate> updates,
                              std::span<const RttSample> samples,
                              std::int64_t tolerance) {
  FlaggedUpdates out;
  out.valid.assign(updates.size(), false);
  out.updates = std::move(updates);
  if (samples.size() < 2) return out;

  std::size_t j = 0;
  const std::size_t n = out.updates.size();
  // Updates at or before the first sample belong to no gap.
  while (j < n && out.updates[j].timestamp <= samples.front().timestamp) ++j;
  for (std::size_t k = 0; k + 1 < samples.size() && j < n; ++k) {
    const Timestamp lo = samples[k].timestamp;
    const Timestamp hi = samples[k + 1].timestamp;
    const std::size_t first = j;
    while (j < n && out.updates[j].timestamp > lo &&
           out.updates[j].timestamp <= hi)
      ++j;
    if (j == first) continue;  // gap holds no updates
    if (hi - lo > tolerance) continue;  // too wide: nothing here is visible
    out.valid[j - 1] = true;  // only the last update in the gap survives
  }
  return out;
}

MatchReport match(const FlaggedUpdates& updates,
                  std::span<const Changepoint> changepoints,
                  std::int64_t tolerance, std::string probe_id,
                  std::string cp_id, Ipv4 target, Ipv4Prefix prefix) {
  MatchReport report;
  report.probe_id = std::move(probe_id);
  report.cp_id = std::move(cp_id);
  report.target = target;
  report.prefix = prefix;

  std::size_t matched_count = 0;
  for (std::size_t i = 0; i < updates.updates.size(); ++i) {
    if (!updates.valid[i]) continue;
    const BgpUpdate& u = updates.updates[i];
    MatchEntry entry;
    entry.update = u;
    entry.ordinal = i;
    // Integer test 2*|cp - t| <= tolerance avoids rounding the half-width.
    auto begin = std::partition_point(
        changepoints.begin(), changepoints.end(), [&](const Changepoint& c) {
          return 2 * (c.timestamp - u.timestamp) < -tolerance;
        });
    for (auto it = begin;
         it != changepoints.end() && 2 * (it->timestamp - u.timestamp) <= tolerance;
         ++it)
      entry.matched_changepoints.push_back(*it);
    entry.matched = !entry.matched_changepoints.empty();
    matched_count += entry.matched ? 1 : 0;
    report.entries.push_back(std::move(entry));
  }

  if (report.entries.empty()) {
    report.correlation_factor = 0.0;
    report.insufficient_data = true;
  } else {
    report.correlation_factor = static_cast<double>(matched_count) /
                                static_cast<double>(report.entries.size());
  }
  return report;
}

PairResult run_pair(std::span<const RttMeasurement> rtt,
                    std::span<const BgpUpdate> bgp, const std::string& probe,
                    const std::string& cp, Ipv4 target, Ipv4Prefix prefix,
                    const Params& params) {
  params.validate();

  std::vector<RttMeasurement> mine;
  for (const auto& m : rtt)
    if (m.probe_id == probe && m.target == target) mine.push_back(m);
  mine = ingest::clip_window(mine, params.time_window);

  PairResult result;
  result.samples =
      time_align(preprocess_rtt(mine, target), params.time_shift);

  if (!result.samples.empty()) {
    std::vector<double> values;
    values.reserve(result.samples.size());
    for (const auto& s : result.samples) values.push_back(s.value);
    changepoint::PeltCache cache(std::move(values));
    auto sel = changepoint::elbow_select(cache, params);
    result.elbow = std::move(sel.trace);
    result.selected_penalty = sel.penalty;
    result.changepoints =
        changepoint::to_changepoints(result.samples, cache.run(sel.penalty));
  }

  std::vector<BgpUpdate> theirs;
  for (const auto& u : bgp)
    if (u.cp_id == cp && u.prefix == prefix) theirs.push_back(u);
  theirs = ingest::clip_window(theirs, params.time_window);

  result.updates = preprocess_bgp(std::move(theirs), result.samples,
                                  params.tolerance_window);
  result.report = match(result.updates, result.changepoints,
                        params.tolerance_window, probe, cp, target, prefix);
  return result;
}

PairResult run_pair(const std::filesystem::path& rtt_file,
                    const std::filesystem::path& bgp_file,
                    const std::string& probe, const std::string& cp,
                    Ipv4 target, Ipv4Prefix prefix, const Params& params) {
  const auto rtt = ingest::read_rtt(rtt_file);
  const auto bgp = ingest::read_bgp(bgp_file);
  return run_pair(rtt, bgp, probe, cp, target, prefix, params);
}

void write_match_report_json(std::ostream& out, const PairResult& result,
                             const Params& params) {
  using ordered_json = nlohmann::ordered_json;
  const MatchReport& r = result.report;
  ordered_json j;
  j["probe"] = r.probe_id;
  j["cp"] = r.cp_id;
  j["target"] = r.target.str();
  j["prefix"] = r.prefix.str();
  ordered_json p;
  p["window_start"] = params.time_window.start;
  p["window_end"] = params.time_window.end;
  p["time_shift"] = params.time_shift;
  p["elbow_slope_threshold"] = params.elbow_slope_threshold;
  p["tolerance_window"] = params.tolerance_window;
  p["penalty_base"] = params.penalty_base;
  p["penalty_offset"] = params.penalty_offset;
  p["initial_penalty"] = params.initial_penalty;
  p["rtt_period"] = params.rtt_period;
  j["params"] = std::move(p);
  j["selected_penalty"] = result.selected_penalty;
  j["correlation_factor"] = r.correlation_factor;
  j["insufficient_data"] = r.insufficient_data;
  auto entries = ordered_json::array();
  for (const auto& e : r.entries) {
    ordered_json je;
    je["ordinal"] = e.ordinal;
    je["ts"] = e.update.timestamp;
    je["as_path"] = e.update.as_path;
    je["matched"] = e.matched;
    auto cps = ordered_json::array();
    for (const auto& c : e.matched_changepoints) {
      ordered_json jc;
      jc["ts"] = c.timestamp;
      jc["index"] = c.index;
      jc["mean_before"] = c.mean_before;
      jc["mean_after"] = c.mean_after;
      cps.push_back(std::move(jc));
    }
    je["changepoints"] = std::move(cps);
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);
  out << j.dump() << '\n';
}

}  // namespace bgprtt::pipeline
