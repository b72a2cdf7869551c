#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bgprtt/model.hpp"

namespace bgprtt::aggregate {

/// Right-continuous empirical CDF over factors in [0,1]:
/// F(x) = |{f <= x}| / n. Throws on an empty factor list.
class Cdf {
 public:
  explicit Cdf(std::vector<double> factors);

  double operator()(double x) const;

  /// One (value, F(value)) step per distinct factor, ascending.
  std::vector<std::pair<double, double>> steps() const;

  std::size_t size() const { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

/// Area under the empirical CDF of the factors over [0,1], computed in
/// closed form as 1 - mean(factors). Lower means better correlation.
/// Throws on an empty list or out-of-range factors.
double correlation_score(std::span<const double> factors);

/// Raw inputs of one (probe, CP) pair: RTT measurements already restricted
/// to the probe and target, BGP updates restricted to the CP (all prefixes).
struct PairData {
  std::string probe_id;
  std::string cp_id;
  std::vector<RttMeasurement> rtt;
  std::vector<BgpUpdate> bgp;
};

/// Correlation score per (elbow slope threshold, time shift) cell for one
/// prefix. Cells where no pair had enough data are absent.
struct ScoreSurface {
  Ipv4 target;
  Ipv4Prefix prefix;
  std::map<std::pair<double, std::int64_t>, double> cells;
};

/// Runs the full per-pair pipeline for every grid cell and aggregates the
/// factors of all pairs into one score per cell, one surface per prefix.
/// Segmentations are shared across cells: the penalty schedule does not
/// depend on the slope threshold, and shifting timestamps does not change
/// the sample values.
std::vector<ScoreSurface> sweep(std::span<const PairData> pairs, Ipv4 target,
                                std::span<const Ipv4Prefix> prefixes,
                                std::span<const double> est_values,
                                std::span<const std::int64_t> shift_values,
                                const Params& base_params);

/// The slope-threshold and time-shift grids used throughout the experiments.
std::vector<double> default_est_grid();
std::vector<std::int64_t> default_shift_grid();

/// Probes whose reports matched similar update sets, grouped by connected
/// components of the pairwise-Jaccard graph at the given threshold.
struct EquivalenceClassing {
  double threshold = 0.0;
  std::vector<std::vector<std::string>> classes;  // sorted ids, sorted classes
  /// Pairwise Jaccard indices over matched-update ordinal sets, keyed by
  /// (smaller id, larger id).
  std::map<std::pair<std::string, std::string>, double> similarity;
};

/// All reports must share one CP and target (one report per probe). Two
/// probes with empty matched sets are indistinguishable and get Jaccard 1.
EquivalenceClassing equivalence_classes(std::span<const MatchReport> reports,
                                        double jaccard_threshold);

struct TimelineRow {
  Timestamp timestamp = 0;
  std::size_t ordinal = 0;
  std::string probe_id;
  std::string cp_id;
  bool matched = false;
};

/// One row per report entry, sorted by timestamp then probe.
std::vector<TimelineRow> emit_match_timeline(
    std::span<const MatchReport> reports);

void write_cdf_csv(std::ostream& out, const std::string& label,
                   const Cdf& cdf);
void write_surface_csv(std::ostream& out,
                       std::span<const ScoreSurface> surfaces,
                       std::span<const double> est_values,
                       std::span<const std::int64_t> shift_values);
void write_timeline_csv(std::ostream& out, std::span<const TimelineRow> rows);
void write_classes_json(std::ostream& out, const std::string& cp_id,
                        const std::string& prefix,
                        const EquivalenceClassing& classing);

}  // namespace bgprtt::aggregate
