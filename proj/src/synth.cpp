#include "bgprtt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "bgprtt/rng.hpp"
#include "json.hpp"

namespace bgprtt::synth {

void Scenario::validate() const {
  if (duration <= 0) throw Error("scenario: duration must be positive");
  if (rtt_period <= 0 || traceroute_period <= 0)
    throw Error("scenario: measurement periods must be positive");
  if (base_rtt <= 0.0) throw Error("scenario: base RTT must be positive");
  if (noise_sigma < 0.0) throw Error("scenario: noise sigma must be >= 0");
  if (decoy_prefixes < 0 || decoy_prefixes > 200)
    throw Error("scenario: decoy prefix count must lie in [0, 200]");
  if (decoy_rate_per_day < 0.0) throw Error("scenario: negative decoy rate");
  if (null_hop_every < 0) throw Error("scenario: negative null hop interval");
  if (initial_as_path.empty())
    throw Error("scenario: initial AS-path must be non-empty");
  if (!prefix.contains(target))
    throw Error("scenario: target must lie inside the true prefix");
  Timestamp prev = -1;
  double level = base_rtt;
  for (const auto& e : events) {
    if (e.timestamp <= prev)
      throw Error("scenario: event timestamps must be strictly increasing");
    if (e.timestamp < 0 || e.timestamp > duration)
      throw Error("scenario: event timestamp outside the scenario duration");
    prev = e.timestamp;
    level += e.rtt_mean_delta;
    if (level <= 0.0)
      throw Error("scenario: cumulative RTT deltas drive the mean below zero");
  }
}

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

AsPath parse_as_path(const json& j, const char* what) {
  if (!j.is_array()) throw Error(std::string("scenario: ") + what + " must be an array");
  AsPath path;
  for (const auto& v : j) {
    if (!v.is_number_integer())
      throw Error(std::string("scenario: ") + what + " entries must be integers");
    const std::int64_t a = v.get<std::int64_t>();
    if (a <= 0 || a > 0xFFFFFFFFLL)
      throw Error(std::string("scenario: ") + what + " entries out of range");
    path.push_back(static_cast<Asn>(a));
  }
  return path;
}

// The AS-path in force at a given moment, per switch schedule.
struct PathTimeline {
  std::vector<std::pair<Timestamp, AsPath>> switches;  // sorted by time

  const AsPath& at(Timestamp t) const {
    const AsPath* current = &switches.front().second;
    for (const auto& [when, path] : switches) {
      if (when > t) break;
      current = &path;
    }
    return *current;
  }
};

}  // namespace

Scenario Scenario::from_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open '" + file.string() + "' for reading");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw Error("scenario file '" + file.string() + "' is not a JSON object");

  Scenario s;
  auto get_int = [&](const char* key, std::int64_t& out) {
    if (auto it = j.find(key); it != j.end()) {
      if (!it->is_number_integer())
        throw Error(std::string("scenario: '") + key + "' must be an integer");
      out = it->get<std::int64_t>();
    }
  };
  auto get_double = [&](const char* key, double& out) {
    if (auto it = j.find(key); it != j.end()) {
      if (!it->is_number())
        throw Error(std::string("scenario: '") + key + "' must be a number");
      out = it->get<double>();
    }
  };
  auto get_string = [&](const char* key, std::string& out) {
    if (auto it = j.find(key); it != j.end()) {
      if (!it->is_string())
        throw Error(std::string("scenario: '") + key + "' must be a string");
      out = it->get<std::string>();
    }
  };

  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_integer())
      throw Error("scenario: 'seed' must be an integer");
    s.seed = it->get<std::uint64_t>();
  }
  get_int("start", s.start);
  get_int("duration", s.duration);
  get_int("rtt_period", s.rtt_period);
  get_int("traceroute_period", s.traceroute_period);
  get_double("base_rtt", s.base_rtt);
  get_double("noise_sigma", s.noise_sigma);
  get_string("probe", s.probe_id);
  get_string("cp", s.cp_id);
  std::int64_t probe_as = s.probe_as;
  get_int("probe_as", probe_as);
  if (probe_as <= 0 || probe_as > 0xFFFFFFFFLL)
    throw Error("scenario: 'probe_as' out of range");
  s.probe_as = static_cast<Asn>(probe_as);
  if (auto it = j.find("target"); it != j.end()) {
    if (!it->is_string()) throw Error("scenario: 'target' must be a string");
    s.target = Ipv4::parse(it->get<std::string>());
  }
  if (auto it = j.find("prefix"); it != j.end()) {
    if (!it->is_string()) throw Error("scenario: 'prefix' must be a string");
    s.prefix = Ipv4Prefix::parse(it->get<std::string>());
  }
  if (auto it = j.find("initial_as_path"); it != j.end())
    s.initial_as_path = parse_as_path(*it, "initial_as_path");
  if (auto it = j.find("events"); it != j.end()) {
    if (!it->is_array()) throw Error("scenario: 'events' must be an array");
    for (const auto& ev : *it) {
      SynthEvent e;
      if (!ev.contains("ts") || !ev["ts"].is_number_integer())
        throw Error("scenario: event 'ts' must be an integer");
      e.timestamp = ev["ts"].get<std::int64_t>();
      if (ev.contains("as_path"))
        e.new_as_path = parse_as_path(ev["as_path"], "event as_path");
      if (ev.contains("rtt_delta")) {
        if (!ev["rtt_delta"].is_number())
          throw Error("scenario: event 'rtt_delta' must be a number");
        e.rtt_mean_delta = ev["rtt_delta"].get<double>();
      }
      if (ev.contains("lag")) {
        if (!ev["lag"].is_number_integer())
          throw Error("scenario: event 'lag' must be an integer");
        e.propagation_lag = ev["lag"].get<std::int64_t>();
      }
      s.events.push_back(std::move(e));
    }
  }
  std::int64_t decoys = s.decoy_prefixes;
  get_int("decoy_prefixes", decoys);
  s.decoy_prefixes = static_cast<int>(decoys);
  get_double("decoy_rate_per_day", s.decoy_rate_per_day);
  std::int64_t ixp = 0;
  get_int("ixp_asn", ixp);
  if (ixp < 0 || ixp > 0xFFFFFFFFLL) throw Error("scenario: 'ixp_asn' out of range");
  s.ixp_asn = static_cast<Asn>(ixp);
  std::int64_t null_every = s.null_hop_every;
  get_int("null_hop_every", null_every);
  s.null_hop_every = static_cast<int>(null_every);
  s.validate();
  return s;
}

GeneratedData generate(const Scenario& sc) {
  sc.validate();
  GeneratedData data;

  // Independent sub-streams so adding decoys or traceroute knobs never
  // perturbs the RTT draws.
  SplitMix64 master(sc.seed);
  const std::uint64_t rtt_seed = master.next();
  const std::uint64_t decoy_seed = master.next();

  const Timestamp end = sc.start + sc.duration;

  // Data-plane switch schedule: RTT mean and forward path change together at
  // event time + lag, while the update itself carries the event time.
  PathTimeline paths;
  paths.switches.emplace_back(std::numeric_limits<Timestamp>::min(),
                              sc.initial_as_path);
  std::vector<std::pair<Timestamp, double>> mean_deltas;
  for (const auto& e : sc.events) {
    const Timestamp effect = sc.start + e.timestamp + e.propagation_lag;
    paths.switches.emplace_back(effect, e.new_as_path);
    mean_deltas.emplace_back(effect, e.rtt_mean_delta);
  }
  std::sort(paths.switches.begin(), paths.switches.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::sort(mean_deltas.begin(), mean_deltas.end());

  // RTT stream. The minimum of the three values is the clean mean plus
  // noise; the other two ride above it so preprocessing recovers exactly
  // the noisy minimum.
  {
    SplitMix64 rng(rtt_seed);
    for (Timestamp t = sc.start; t <= end; t += sc.rtt_period) {
      double mean = sc.base_rtt;
      for (const auto& [when, delta] : mean_deltas)
        if (when <= t) mean += delta;
      double low = mean + sc.noise_sigma * rng.next_gaussian();
      if (low < 0.1) low = 0.1;
      const double extra1 = 0.05 + 2.45 * rng.next_unit();
      const double extra2 = 0.05 + 2.45 * rng.next_unit();
      RttMeasurement m;
      m.probe_id = sc.probe_id;
      m.target = sc.target;
      m.timestamp = t;
      m.rtts = {low + extra1, low, low + extra2};
      m.responded_ip = sc.target;
      data.rtt.push_back(std::move(m));
    }
  }

  // True-prefix updates: one per event, at the event timestamp.
  for (const auto& e : sc.events) {
    BgpUpdate u;
    u.cp_id = sc.cp_id;
    u.prefix = sc.prefix;
    u.timestamp = sc.start + e.timestamp;
    u.as_path = e.new_as_path;
    data.bgp.push_back(std::move(u));
    data.truth.event_timestamps.push_back(sc.start + e.timestamp);
    if (e.rtt_mean_delta != 0.0)
      data.truth.correlated_timestamps.push_back(sc.start + e.timestamp);
  }
  data.truth.true_prefix = sc.prefix;

  // Decoy updates: a Poisson stream per decoy prefix, paths cycling among
  // three variants (repeats allowed, as with duplicate announcements).
  {
    SplitMix64 rng(decoy_seed);
    const double per_second = sc.decoy_rate_per_day / 86400.0;
    for (int k = 1; k <= sc.decoy_prefixes; ++k) {
      Ipv4Prefix decoy;
      decoy.network = Ipv4{(198u << 24) | (18u << 16) |
                           (static_cast<std::uint32_t>(k) << 8)};
      decoy.length = 24;
      data.truth.decoy_prefixes.push_back(decoy);
      if (per_second <= 0.0) continue;
      const Asn origin = 59000 + static_cast<Asn>(k);
      const AsPath variants[3] = {{60000 + static_cast<Asn>(3 * k), origin},
                                  {60001 + static_cast<Asn>(3 * k), origin},
                                  {60002 + static_cast<Asn>(3 * k), origin}};
      double t = static_cast<double>(sc.start) +
                 rng.next_exponential(1.0 / per_second);
      while (t <= static_cast<double>(end)) {
        BgpUpdate u;
        u.cp_id = sc.cp_id;
        u.prefix = decoy;
        u.timestamp = static_cast<Timestamp>(t);
        u.as_path = variants[rng.next() % 3];
        data.bgp.push_back(std::move(u));
        t += rng.next_exponential(1.0 / per_second);
      }
    }
  }
  std::stable_sort(data.bgp.begin(), data.bgp.end(),
                   [](const BgpUpdate& a, const BgpUpdate& b) {
                     return a.timestamp < b.timestamp;
                   });

  // Per-AS hop prefixes: sequential /16 blocks in first-appearance order.
  std::map<Asn, Ipv4Prefix> hop_prefix;
  auto hop_block_for = [&](Asn asn) {
    auto it = hop_prefix.find(asn);
    if (it == hop_prefix.end()) {
      const auto index = static_cast<std::uint32_t>(hop_prefix.size());
      Ipv4Prefix p;
      p.network = Ipv4{(20u << 24) | ((index & 0xFFu) << 16)};
      p.length = 16;
      it = hop_prefix.emplace(asn, p).first;
    }
    return it->second;
  };
  for (Asn a : sc.initial_as_path) hop_block_for(a);
  for (const auto& e : sc.events)
    for (Asn a : e.new_as_path) hop_block_for(a);
  if (sc.ixp_asn != 0) hop_block_for(sc.ixp_asn);

  // Traceroute stream: a leading private hop, then one hop per AS of the
  // path in force, the optional IXP hop after the first AS, and the target
  // last. A withdrawn path yields null hops past the private one.
  {
    int tick = 0;
    for (Timestamp t = sc.start + sc.traceroute_period / 2; t <= end;
         t += sc.traceroute_period) {
      ++tick;
      TracerouteMeasurement m;
      m.probe_id = sc.probe_id;
      m.target = sc.target;
      m.timestamp = t;
      m.hops.emplace_back(Ipv4{(192u << 24) | (168u << 16) | 1u});
      const AsPath& path = paths.at(t);
      if (path.empty()) {
        m.hops.emplace_back(std::nullopt);
        m.hops.emplace_back(std::nullopt);
        m.hops.emplace_back(std::nullopt);
      } else {
        for (std::size_t h = 0; h < path.size(); ++h) {
          const Ipv4Prefix block = hop_block_for(path[h]);
          const std::uint32_t host =
              (static_cast<std::uint32_t>(tick) * 7 + h) % 250 + 1;
          m.hops.emplace_back(Ipv4{block.network.value | host});
          if (h == 0 && sc.ixp_asn != 0) {
            const Ipv4Prefix ixp_block = hop_block_for(sc.ixp_asn);
            m.hops.emplace_back(Ipv4{ixp_block.network.value | host});
          }
        }
        m.hops.emplace_back(sc.target);
      }
      if (sc.null_hop_every > 0 && tick % sc.null_hop_every == 0 &&
          m.hops.size() > 2)
        m.hops.insert(m.hops.begin() + 2, std::nullopt);
      data.traceroutes.push_back(std::move(m));
    }
  }

  // Prefix table: the true prefix originated by the last AS of the initial
  // path, plus the per-AS hop blocks.
  data.prefix_rows.push_back({sc.prefix, sc.initial_as_path.back(), 10});
  for (const auto& [asn, block] : hop_prefix)
    data.prefix_rows.push_back({block, asn, 10});
  if (sc.ixp_asn != 0) data.ixp_asns.push_back(sc.ixp_asn);

  return data;
}

OutputFiles write_files(const GeneratedData& data,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  OutputFiles files;
  files.rtt = dir / "rtt.ndjson";
  files.bgp = dir / "bgp.ndjson";
  files.traceroute = dir / "traceroute.ndjson";
  files.ground_truth = dir / "ground_truth.json";
  files.prefix_table = dir / "prefix_table.csv";
  files.ixp_list = dir / "ixp.txt";

  ingest::write_rtt(files.rtt, data.rtt);
  ingest::write_bgp(files.bgp, data.bgp);
  ingest::write_traceroute(files.traceroute, data.traceroutes);
  ingest::write_prefix_table(files.prefix_table, data.prefix_rows);
  ingest::write_ixp_list(files.ixp_list, data.ixp_asns);

  std::ofstream out(files.ground_truth);
  if (!out)
    throw Error("cannot open '" + files.ground_truth.string() + "' for writing");
  ordered_json j;
  j["true_prefix"] = data.truth.true_prefix.str();
  j["correlated_timestamps"] = data.truth.correlated_timestamps;
  j["event_timestamps"] = data.truth.event_timestamps;
  auto decoys = ordered_json::array();
  for (const auto& p : data.truth.decoy_prefixes) decoys.push_back(p.str());
  j["decoy_prefixes"] = std::move(decoys);
  out << j.dump(2) << '\n';
  return files;
}

}  // namespace bgprtt::synth
