#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "bgprtt/model.hpp"

namespace bgprtt::changepoint {

/// A penalized segmentation of a value sequence. Changepoint indices are the
/// positions at which a new segment starts, strictly increasing in [1, n-1].
/// total_cost = sum of per-segment costs + penalty * number of changepoints.
struct Segmentation {
  std::vector<std::size_t> changepoint_indices;
  double total_cost = 0.0;
  double penalty = 0.0;
};

/// One iteration of the elbow-method penalty search.
struct ElbowRow {
  int iteration = 0;
  double penalty = 0.0;
  std::size_t changepoint_count = 0;
  /// (p_i - p_{i-1}) / (cpt_{i-1} - cpt_i); undefined when the count did not
  /// decrease (treated as infinite slope, which never stops the search).
  std::optional<double> difference_quotient;
};

struct ElbowTrace {
  std::vector<ElbowRow> rows;
  /// Set when the count reached zero before the slope criterion fired; the
  /// last penalty is returned in that case.
  bool guard_triggered = false;
};

struct ElbowSelection {
  double penalty = 0.0;
  ElbowTrace trace;
};

/// Within-segment sum of squared deviations from the segment mean, O(1) per
/// query from prefix sums. Prefix sums are accumulated in long double to
/// bound drift; identical query expressions yield identical doubles, which
/// the exact-cost comparisons in the segmenters rely on.
class CostModel {
 public:
  explicit CostModel(std::span<const double> values);

  /// Cost of the half-open segment [lo, hi). Throws on an empty or
  /// out-of-range segment.
  double segment_cost(std::size_t lo, std::size_t hi) const;

  double segment_mean(std::size_t lo, std::size_t hi) const;

  std::size_t size() const { return sum_.size() - 1; }

 private:
  std::vector<long double> sum_;
  std::vector<long double> sumsq_;
};

/// Convenience wrapper over CostModel for a one-off query.
double segment_cost(std::span<const double> values, std::size_t lo,
                    std::size_t hi);

/// Exact penalized segmentation with PELT pruning. Returns the segmentation
/// minimizing sum of segment costs + penalty * K over all segmentations; the
/// pruning only discards candidates that are strictly worse at the current
/// position, so the optimum (including cost ties) is identical to
/// optimal_partitioning. Ties are broken toward fewer changepoints, then
/// toward the lexicographically smallest index list.
Segmentation pelt(std::span<const double> values, double penalty);

/// The unpruned O(n^2) dynamic program, kept as an independent reference for
/// pelt. Same contract and tie-breaking.
Segmentation optimal_partitioning(std::span<const double> values,
                                  double penalty);

/// Memoizes pelt results per penalty for one fixed value sequence. The
/// penalty schedule is shared across elbow-slope-threshold values, so sweeps
/// reuse every segmentation they have already paid for.
class PeltCache {
 public:
  explicit PeltCache(std::vector<double> values) : values_(std::move(values)) {}

  const Segmentation& run(double penalty);

  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
  std::map<double, Segmentation> memo_;
};

/// Elbow-method penalty selection. Iterates p_0 = initial_penalty and
/// p_i = c1^i + c2 for i >= 1, computing the changepoint count at each
/// penalty, and stops at the first i with a count drop whose difference
/// quotient falls below the elbow slope threshold. If the count reaches zero
/// before that happens the last penalty is returned with the trace flagged.
ElbowSelection elbow_select(PeltCache& cache, const Params& params);
ElbowSelection elbow_select(std::span<const double> values,
                            const Params& params);

/// Lifts segmentation indices onto the sample timeline: each index k becomes
/// a Changepoint timestamped at sample k (the first sample of the new
/// regime), carrying the two adjacent segment means.
std::vector<Changepoint> to_changepoints(std::span<const RttSample> samples,
                                         const Segmentation& seg);

}  // namespace bgprtt::changepoint
