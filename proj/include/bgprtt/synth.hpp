#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bgprtt/ingest.hpp"
#include "bgprtt/model.hpp"

namespace bgprtt::synth {

/// One injected routing event. The update is emitted at the event timestamp;
/// the RTT mean and the traceroute path switch at timestamp + propagation
/// lag (the data-plane effect may precede or follow the update, so the lag
/// may be negative).
struct SynthEvent {
  std::int64_t timestamp = 0;  // seconds from scenario start
  AsPath new_as_path;          // empty = withdrawal
  double rtt_mean_delta = 0.0;  // milliseconds, added to the mean
  std::int64_t propagation_lag = 0;  // seconds
};

/// A fully seeded synthetic scenario: one probe and one collector peer, a
/// target inside the true prefix, plus optional decoy prefixes whose updates
/// are independent of everything else.
struct Scenario {
  std::uint64_t seed = 1;
  Timestamp start = 1'325'376'000;  // 2012-01-01T00:00:00Z
  std::int64_t duration = 172'800;  // seconds
  std::int64_t rtt_period = 240;
  std::int64_t traceroute_period = 1'200;
  double base_rtt = 30.0;   // milliseconds
  double noise_sigma = 0.0;  // milliseconds
  std::string probe_id = "p1";
  std::string cp_id = "cp1";
  Asn probe_as = 65001;
  Ipv4 target = Ipv4{(193u << 24) | (0u << 16) | (14u << 8) | 129u};
  Ipv4Prefix prefix{Ipv4{(193u << 24) | (14u << 8)}, 24};
  AsPath initial_as_path{2914, 3333};
  std::vector<SynthEvent> events;  // strictly increasing timestamps
  int decoy_prefixes = 0;
  double decoy_rate_per_day = 12.0;
  Asn ixp_asn = 0;  // when set, inserted as a traceroute hop and listed as IXP
  /// When > 0, every Nth traceroute gets one null hop injected.
  int null_hop_every = 0;

  void validate() const;
  static Scenario from_json_file(const std::filesystem::path& file);
};

/// Which updates should correlate: the true-prefix events that actually move
/// the RTT mean.
struct GroundTruth {
  Ipv4Prefix true_prefix;
  std::vector<Timestamp> correlated_timestamps;
  std::vector<Timestamp> event_timestamps;
  std::vector<Ipv4Prefix> decoy_prefixes;
};

struct GeneratedData {
  std::vector<RttMeasurement> rtt;
  std::vector<BgpUpdate> bgp;
  std::vector<TracerouteMeasurement> traceroutes;
  std::vector<ingest::PrefixTableRow> prefix_rows;
  std::vector<Asn> ixp_asns;
  GroundTruth truth;
};

/// Deterministic under a fixed seed: identical scenarios produce identical
/// data, and the emitted files are byte-identical across runs.
GeneratedData generate(const Scenario& scenario);

struct OutputFiles {
  std::filesystem::path rtt;
  std::filesystem::path bgp;
  std::filesystem::path traceroute;
  std::filesystem::path ground_truth;
  std::filesystem::path prefix_table;
  std::filesystem::path ixp_list;
};

/// Writes rtt.ndjson, bgp.ndjson, traceroute.ndjson, ground_truth.json,
/// prefix_table.csv and ixp.txt into the directory. The prefix table and
/// IXP list make the generated data self-contained for validation runs.
OutputFiles write_files(const GeneratedData& data,
                        const std::filesystem::path& dir);

}  // namespace bgprtt::synth
