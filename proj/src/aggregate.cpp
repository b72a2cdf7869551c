#include "bgprtt/aggregate.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <set>

#include "bgprtt/format.hpp"
#include "bgprtt/ingest.hpp"
#include "bgprtt/pipeline.hpp"
#include "json.hpp"

namespace bgprtt::aggregate {

Cdf::Cdf(std::vector<double> factors) : sorted_(std::move(factors)) {
  if (sorted_.empty()) throw Error("cdf: empty factor list");
  for (double f : sorted_)
    if (!(f >= 0.0 && f <= 1.0))
      throw Error("cdf: factors must lie in [0,1]");
  std::sort(sorted_.begin(), sorted_.end());
}

double Cdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) /
         static_cast<double>(sorted_.size());
}

std::vector<std::pair<double, double>> Cdf::steps() const {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < sorted_.size(); ++i) {
    if (i + 1 < sorted_.size() && sorted_[i + 1] == sorted_[i]) continue;
    out.emplace_back(sorted_[i], static_cast<double>(i + 1) /
                                     static_cast<double>(sorted_.size()));
  }
  return out;
}

double correlation_score(std::span<const double> factors) {
  if (factors.empty()) throw Error("correlation_score: empty factor list");
  double sum = 0.0;
  for (double f : factors) {
    if (!(f >= 0.0 && f <= 1.0))
      throw Error("correlation_score: factors must lie in [0,1]");
    sum += f;
  }
  return 1.0 - sum / static_cast<double>(factors.size());
}

std::vector<double> default_est_grid() {
  return {0.001, 0.01, 0.1, 1, 5, 10, 50, 100, 200, 300, 1000, 10000};
}

std::vector<std::int64_t> default_shift_grid() {
  return {-600, -300, -120, 0, 120, 300, 600};
}

std::vector<ScoreSurface> sweep(std::span<const PairData> pairs, Ipv4 target,
                                std::span<const Ipv4Prefix> prefixes,
                                std::span<const double> est_values,
                                std::span<const std::int64_t> shift_values,
                                const Params& base_params) {
  base_params.validate();
  if (est_values.empty() || shift_values.empty())
    throw Error("sweep: empty parameter grid");

  // factors[prefix][(est, shift)] -> one factor per pair with data
  std::vector<std::map<std::pair<double, std::int64_t>, std::vector<double>>>
      factors(prefixes.size());

  for (const auto& pair : pairs) {
    const auto clipped_rtt =
        ingest::clip_window(pair.rtt, base_params.time_window);
    const auto samples0 = pipeline::preprocess_rtt(clipped_rtt, target);
    if (samples0.empty()) continue;

    std::vector<double> values;
    values.reserve(samples0.size());
    for (const auto& s : samples0) values.push_back(s.value);
    changepoint::PeltCache cache(std::move(values));

    std::vector<std::vector<BgpUpdate>> per_prefix(prefixes.size());
    for (std::size_t p = 0; p < prefixes.size(); ++p) {
      std::vector<BgpUpdate> mine;
      for (const auto& u : pair.bgp)
        if (u.cp_id == pair.cp_id && u.prefix == prefixes[p])
          mine.push_back(u);
      per_prefix[p] = ingest::clip_window(mine, base_params.time_window);
    }

    for (std::int64_t shift : shift_values) {
      const auto aligned = pipeline::time_align(samples0, shift);
      std::vector<pipeline::FlaggedUpdates> flagged(prefixes.size());
      for (std::size_t p = 0; p < prefixes.size(); ++p)
        flagged[p] = pipeline::preprocess_bgp(per_prefix[p], aligned,
                                              base_params.tolerance_window);

      for (double est : est_values) {
        Params params = base_params;
        params.elbow_slope_threshold = est;
        params.time_shift = shift;
        const auto sel = changepoint::elbow_select(cache, params);
        const auto cps =
            changepoint::to_changepoints(aligned, cache.run(sel.penalty));
        for (std::size_t p = 0; p < prefixes.size(); ++p) {
          const auto report = pipeline::match(
              flagged[p], cps, params.tolerance_window, pair.probe_id,
              pair.cp_id, target, prefixes[p]);
          if (report.insufficient_data) continue;
          factors[p][{est, shift}].push_back(report.correlation_factor);
        }
      }
    }
  }

  std::vector<ScoreSurface> surfaces;
  surfaces.reserve(prefixes.size());
  for (std::size_t p = 0; p < prefixes.size(); ++p) {
    ScoreSurface s;
    s.target = target;
    s.prefix = prefixes[p];
    for (const auto& [cell, fs] : factors[p])
      s.cells[cell] = correlation_score(fs);
    surfaces.push_back(std::move(s));
  }
  return surfaces;
}

namespace {

std::set<std::size_t> matched_ordinals(const MatchReport& report) {
  std::set<std::size_t> out;
  for (const auto& e : report.entries)
    if (e.matched) out.insert(e.ordinal);
  return out;
}

double jaccard(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  if (a.empty() && b.empty()) return 1.0;  // indistinguishable
  std::size_t inter = 0;
  for (std::size_t x : a) inter += b.count(x);
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

EquivalenceClassing equivalence_classes(std::span<const MatchReport> reports,
                                        double jaccard_threshold) {
  if (!(jaccard_threshold >= 0.0 && jaccard_threshold <= 1.0))
    throw Error("equivalence_classes: threshold must lie in [0,1]");
  EquivalenceClassing out;
  out.threshold = jaccard_threshold;
  if (reports.empty()) return out;

  for (const auto& r : reports) {
    if (r.cp_id != reports.front().cp_id || r.target != reports.front().target)
      throw Error("equivalence_classes: reports must share one CP and target");
  }

  std::vector<std::string> ids;
  std::vector<std::set<std::size_t>> sets;
  for (const auto& r : reports) {
    ids.push_back(r.probe_id);
    sets.push_back(matched_ordinals(r));
  }

  UnionFind uf(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const double sim = jaccard(sets[i], sets[j]);
      const auto key = ids[i] <= ids[j] ? std::make_pair(ids[i], ids[j])
                                        : std::make_pair(ids[j], ids[i]);
      out.similarity[key] = sim;
      if (sim >= jaccard_threshold) uf.unite(i, j);
    }
  }

  std::map<std::size_t, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < ids.size(); ++i)
    groups[uf.find(i)].push_back(ids[i]);
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end());
    out.classes.push_back(std::move(members));
  }
  std::sort(out.classes.begin(), out.classes.end());
  return out;
}

std::vector<TimelineRow> emit_match_timeline(
    std::span<const MatchReport> reports) {
  std::vector<TimelineRow> rows;
  for (const auto& r : reports)
    for (const auto& e : r.entries)
      rows.push_back(
          {e.update.timestamp, e.ordinal, r.probe_id, r.cp_id, e.matched});
  std::sort(rows.begin(), rows.end(),
            [](const TimelineRow& a, const TimelineRow& b) {
              return std::tie(a.timestamp, a.probe_id, a.cp_id, a.ordinal) <
                     std::tie(b.timestamp, b.probe_id, b.cp_id, b.ordinal);
            });
  return rows;
}

void write_cdf_csv(std::ostream& out, const std::string& label,
                   const Cdf& cdf) {
  for (const auto& [x, f] : cdf.steps())
    out << label << ',' << format_double(x) << ',' << format_double(f) << '\n';
}

void write_surface_csv(std::ostream& out,
                       std::span<const ScoreSurface> surfaces,
                       std::span<const double> est_values,
                       std::span<const std::int64_t> shift_values) {
  out << "est,shift,prefix,score\n";
  for (double est : est_values)
    for (std::int64_t shift : shift_values)
      for (const auto& s : surfaces) {
        const auto it = s.cells.find({est, shift});
        if (it == s.cells.end()) continue;
        out << format_double(est) << ',' << shift << ',' << s.prefix.str()
            << ',' << format_double(it->second) << '\n';
      }
}

void write_timeline_csv(std::ostream& out, std::span<const TimelineRow> rows) {
  out << "timestamp,ordinal,probe,cp,matched\n";
  for (const auto& r : rows)
    out << r.timestamp << ',' << r.ordinal << ',' << r.probe_id << ','
        << r.cp_id << ',' << (r.matched ? 'Y' : 'N') << '\n';
}

void write_classes_json(std::ostream& out, const std::string& cp_id,
                        const std::string& prefix,
                        const EquivalenceClassing& classing) {
  using ordered_json = nlohmann::ordered_json;
  ordered_json j;
  j["cp"] = cp_id;
  j["prefix"] = prefix;
  j["threshold"] = classing.threshold;
  j["classes"] = classing.classes;
  auto sims = ordered_json::array();
  for (const auto& [key, value] : classing.similarity) {
    ordered_json s;
    s["a"] = key.first;
    s["b"] = key.second;
    s["jaccard"] = value;
    sims.push_back(std::move(s));
  }
  j["similarity"] = std::move(sims);
  out << j.dump() << '\n';
}

}  // namespace bgprtt::aggregate
