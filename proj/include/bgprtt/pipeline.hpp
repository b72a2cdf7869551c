#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bgprtt/changepoint.hpp"
#include "bgprtt/model.hpp"

namespace bgprtt::pipeline {

/// Keeps measurements with exactly 3 RTT values and a responding IP equal to
/// the expected one; everything else is abnormal and dropped. Each kept
/// measurement yields one sample holding the minimum of its values.
std::vector<RttSample> preprocess_rtt(std::span<const RttMeasurement> ms,
                                      Ipv4 expected_ip);

/// Adds the shift to every sample timestamp. Throws when a timestamp would
/// land before the epoch.
std::vector<RttSample> time_align(std::vector<RttSample> samples,
                                  std::int64_t shift);

/// A timestamp-sorted update sequence with per-update validity flags.
/// Valid and invalid updates partition the input.
struct FlaggedUpdates {
  std::vector<BgpUpdate> updates;
  std::vector<bool> valid;

  std::vector<BgpUpdate> valid_updates() const;
  std::vector<BgpUpdate> invalid_updates() const;
  std::size_t valid_count() const;
};

/// Keeps at most one update per gap between consecutive RTT samples: within
/// a gap (s_k, s_{k+1}] the last update is valid and the rest invalid, and
/// when the gap exceeds the tolerance window every update in it is invalid.
/// Updates at or before the first sample, or after the last, are invalid.
/// With fewer than two samples everything is invalid.
FlaggedUpdates preprocess_bgp(std::vector<BgpUpdate> updates,
                              std::span<const RttSample> samples,
                              std::int64_t tolerance);

/// Marks each valid update matched when some changepoint falls within the
/// tolerance window centered at the update timestamp (half-width
/// tolerance/2 on each side, inclusive). The correlation factor is
/// matched / valid; with no valid updates it is 0 and the report is flagged
/// as insufficient data.
MatchReport match(const FlaggedUpdates& updates,
                  std::span<const Changepoint> changepoints,
                  std::int64_t tolerance, std::string probe_id,
                  std::string cp_id, Ipv4 target, Ipv4Prefix prefix);

/// Everything one (probe, CP, target, prefix) run produces.
struct PairResult {
  MatchReport report;
  std::vector<RttSample> samples;  // preprocessed and aligned
  std::vector<Changepoint> changepoints;
  changepoint::ElbowTrace elbow;
  double selected_penalty = 0.0;
  FlaggedUpdates updates;  // clipped to the window, with validity flags
};

/// Full per-pair run: window clipping, RTT preprocessing, time alignment,
/// elbow-selected changepoint detection, BGP preprocessing, and matching.
/// Inputs are filtered to the given probe/target and CP/prefix. The expected
/// responding IP is the declared target. Deterministic given inputs and
/// params.
PairResult run_pair(std::span<const RttMeasurement> rtt,
                    std::span<const BgpUpdate> bgp, const std::string& probe,
                    const std::string& cp, Ipv4 target, Ipv4Prefix prefix,
                    const Params& params);

PairResult run_pair(const std::filesystem::path& rtt_file,
                    const std::filesystem::path& bgp_file,
                    const std::string& probe, const std::string& cp,
                    Ipv4 target, Ipv4Prefix prefix, const Params& params);

/// One JSON object: pair ids, params echo, entry list, factor.
void write_match_report_json(std::ostream& out, const PairResult& result,
                             const Params& params);

}  // namespace bgprtt::pipeline
