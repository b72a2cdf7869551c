#include "bgprtt/changepoint.hpp"

#include <algorithm>
#include <cmath>

namespace bgprtt::changepoint {

CostModel::CostModel(std::span<const double> values) {
  sum_.resize(values.size() + 1);
  sumsq_.resize(values.size() + 1);
  long double s = 0.0L;
  long double q = 0.0L;
  sum_[0] = 0.0L;
  sumsq_[0] = 0.0L;
  for (std::size_t i = 0; i < values.size(); ++i) {
    s += values[i];
    q += static_cast<long double>(values[i]) * values[i];
    sum_[i + 1] = s;
    sumsq_[i + 1] = q;
  }
}

double CostModel::segment_cost(std::size_t lo, std::size_t hi) const {
  if (lo >= hi || hi >= sum_.size())
    throw Error("segment_cost: empty or out-of-range segment");
  const long double s = sum_[hi] - sum_[lo];
  const long double q = sumsq_[hi] - sumsq_[lo];
  const long double c = q - s * s / static_cast<long double>(hi - lo);
  return c > 0.0L ? static_cast<double>(c) : 0.0;
}

double CostModel::segment_mean(std::size_t lo, std::size_t hi) const {
  if (lo >= hi || hi >= sum_.size())
    throw Error("segment_mean: empty or out-of-range segment");
  return static_cast<double>((sum_[hi] - sum_[lo]) /
                             static_cast<long double>(hi - lo));
}

double segment_cost(std::span<const double> values, std::size_t lo,
                    std::size_t hi) {
  return CostModel(values).segment_cost(lo, hi);
}

namespace {

// Changepoint list of the best partition of [0, t), reconstructed from
// parent pointers. Only needed to break exact cost-and-count ties.
std::vector<std::size_t> reconstruct(const std::vector<std::size_t>& parent,
                                     std::size_t t) {
  std::vector<std::size_t> indices;
  for (std::size_t cur = t; cur != 0; cur = parent[cur]) indices.push_back(cur);
  std::reverse(indices.begin(), indices.end());
  return indices;
}

struct Incumbent {
  bool set = false;
  double cost = 0.0;
  std::size_t count = 0;
  std::size_t start = 0;  // last segment starts here
};

// True when the candidate partition ending with segment [start, t) improves
// on the incumbent: smaller cost, then fewer changepoints, then the
// lexicographically smaller changepoint index list. reconstruct(parent, s)
// is exactly the candidate's changepoint list: the chain of segment starts
// ending at s, with s itself the newest changepoint (empty when s == 0).
bool improves(const Incumbent& best, double cost, std::size_t count,
              std::size_t start, const std::vector<std::size_t>& parent) {
  if (!best.set) return true;
  if (cost != best.cost) return cost < best.cost;
  if (count != best.count) return count < best.count;
  if (start == best.start) return false;
  return reconstruct(parent, start) < reconstruct(parent, best.start);
}

}  // namespace

Segmentation pelt(std::span<const double> values, double penalty) {
  if (values.empty()) throw Error("pelt: empty input");
  if (!(penalty >= 0.0) || !std::isfinite(penalty))
    throw Error("pelt: penalty must be finite and non-negative");
  const std::size_t n = values.size();
  const CostModel cost(values);

  std::vector<double> best_cost(n + 1, 0.0);
  std::vector<std::size_t> cp_count(n + 1, 0);
  std::vector<std::size_t> parent(n + 1, 0);
  best_cost[0] = -penalty;

  std::vector<std::size_t> candidates{0};
  std::vector<std::size_t> kept;
  kept.reserve(n + 1);

  for (std::size_t t = 1; t <= n; ++t) {
    Incumbent best;
    for (std::size_t s : candidates) {
      const double cand = best_cost[s] + cost.segment_cost(s, t) + penalty;
      const std::size_t count = s == 0 ? 0 : cp_count[s] + 1;
      if (improves(best, cand, count, s, parent)) {
        best.set = true;
        best.cost = cand;
        best.count = count;
        best.start = s;
      }
    }
    best_cost[t] = best.cost;
    cp_count[t] = best.count;
    parent[t] = best.start;

    // Prune candidates that are strictly worse; anything that could still
    // achieve (or tie) a future optimum survives.
    kept.clear();
    for (std::size_t s : candidates)
      if (best_cost[s] + cost.segment_cost(s, t) <= best_cost[t])
        kept.push_back(s);
    kept.push_back(t);
    candidates = kept;
  }

  Segmentation seg;
  seg.changepoint_indices = reconstruct(parent, n);
  seg.changepoint_indices.pop_back();  // n terminates the list, not a changepoint
  seg.total_cost = best_cost[n];
  seg.penalty = penalty;
  return seg;
}

Segmentation optimal_partitioning(std::span<const double> values,
                                  double penalty) {
  if (values.empty()) throw Error("optimal_partitioning: empty input");
  if (!(penalty >= 0.0) || !std::isfinite(penalty))
    throw Error("optimal_partitioning: penalty must be finite and non-negative");
  const std::size_t n = values.size();
  const CostModel cost(values);

  std::vector<double> best_cost(n + 1, 0.0);
  std::vector<std::size_t> cp_count(n + 1, 0);
  std::vector<std::size_t> parent(n + 1, 0);
  best_cost[0] = -penalty;

  for (std::size_t t = 1; t <= n; ++t) {
    Incumbent best;
    for (std::size_t s = 0; s < t; ++s) {
      const double cand = best_cost[s] + cost.segment_cost(s, t) + penalty;
      const std::size_t count = s == 0 ? 0 : cp_count[s] + 1;
      if (improves(best, cand, count, s, parent)) {
        best.set = true;
        best.cost = cand;
        best.count = count;
        best.start = s;
      }
    }
    best_cost[t] = best.cost;
    cp_count[t] = best.count;
    parent[t] = best.start;
  }

  Segmentation seg;
  seg.changepoint_indices = reconstruct(parent, n);
  seg.changepoint_indices.pop_back();
  seg.total_cost = best_cost[n];
  seg.penalty = penalty;
  return seg;
}

const Segmentation& PeltCache::run(double penalty) {
  auto it = memo_.find(penalty);
  if (it == memo_.end())
    it = memo_.emplace(penalty, pelt(values_, penalty)).first;
  return it->second;
}

ElbowSelection elbow_select(PeltCache& cache, const Params& params) {
  if (params.elbow_slope_threshold <= 0.0)
    throw Error("elbow_select: slope threshold must be positive");
  if (params.penalty_base <= 1.0)
    throw Error("elbow_select: penalty base must be greater than 1");
  if (params.initial_penalty <= 0.0)
    throw Error("elbow_select: initial penalty must be positive");

  ElbowSelection sel;
  double prev_penalty = params.initial_penalty;
  std::size_t prev_count = cache.run(prev_penalty).changepoint_indices.size();
  sel.trace.rows.push_back({0, prev_penalty, prev_count, std::nullopt});
  if (prev_count == 0) {
    sel.trace.guard_triggered = true;
    sel.penalty = prev_penalty;
    return sel;
  }

  for (int i = 1;; ++i) {
    const double penalty =
        std::pow(params.penalty_base, i) + params.penalty_offset;
    if (!(penalty > prev_penalty))
      throw Error("elbow_select: penalty schedule must be strictly increasing");
    if (!std::isfinite(penalty))
      throw Error("elbow_select: penalty schedule overflowed");
    const std::size_t count = cache.run(penalty).changepoint_indices.size();
    std::optional<double> quotient;
    if (count < prev_count)
      quotient =
          (penalty - prev_penalty) / static_cast<double>(prev_count - count);
    sel.trace.rows.push_back({i, penalty, count, quotient});
    if (quotient && *quotient < params.elbow_slope_threshold) {
      sel.penalty = penalty;
      return sel;
    }
    if (count == 0) {
      sel.trace.guard_triggered = true;
      sel.penalty = penalty;
      return sel;
    }
    prev_penalty = penalty;
    prev_count = count;
  }
}

ElbowSelection elbow_select(std::span<const double> values,
                            const Params& params) {
  PeltCache cache(std::vector<double>(values.begin(), values.end()));
  return elbow_select(cache, params);
}

std::vector<Changepoint> to_changepoints(std::span<const RttSample> samples,
                                         const Segmentation& seg) {
  std::vector<double> values;
  values.reserve(samples.size());
  for (const auto& s : samples) values.push_back(s.value);
  const CostModel cost(values);
  const std::size_t n = samples.size();

  std::vector<Changepoint> out;
  out.reserve(seg.changepoint_indices.size());
  std::vector<std::size_t> bounds;
  bounds.push_back(0);
  for (std::size_t k : seg.changepoint_indices) {
    if (k == 0 || k >= n) throw Error("to_changepoints: index out of range");
    bounds.push_back(k);
  }
  bounds.push_back(n);
  for (std::size_t j = 1; j + 1 < bounds.size(); ++j) {
    Changepoint cp;
    cp.index = bounds[j];
    cp.timestamp = samples[bounds[j]].timestamp;
    cp.mean_before = cost.segment_mean(bounds[j - 1], bounds[j]);
    cp.mean_after = cost.segment_mean(bounds[j], bounds[j + 1]);
    out.push_back(cp);
  }
  return out;
}

}  // namespace bgprtt::changepoint
