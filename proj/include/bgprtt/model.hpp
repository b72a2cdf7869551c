#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bgprtt {

/// Unix epoch seconds, UTC. Both route collectors and measurement probes
/// publish second-resolution timestamps; sub-second precision is not modeled.
using Timestamp = std::int64_t;

using Asn = std::uint32_t;

/// Sentinel for hops that cannot be mapped to any announced prefix.
/// AS 0 is never a valid public AS number.
inline constexpr Asn kUnknownAs = 0;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// IPv4 address, host byte order.
struct Ipv4 {
  std::uint32_t value = 0;

  static Ipv4 parse(std::string_view text);
  static std::optional<Ipv4> try_parse(std::string_view text);

  std::string str() const;

  /// RFC1918: 10.0.0.0/8, 172.16.0.0/12, 192.168.0.0/16.
  bool is_private() const;

  auto operator<=>(const Ipv4&) const = default;
};

/// IPv4 CIDR prefix. The network address is stored with host bits cleared.
struct Ipv4Prefix {
  Ipv4 network;
  int length = 0;  // 0..32

  static Ipv4Prefix parse(std::string_view text);

  bool contains(Ipv4 addr) const;
  std::string str() const;

  auto operator<=>(const Ipv4Prefix&) const = default;
};

/// AS-path as observed at a collector peer. Empty means withdrawal, so
/// comparisons between any two routing states stay uniform.
using AsPath = std::vector<Asn>;

/// Element-wise equality; two withdrawals (both empty) compare equal.
bool as_path_equal(const AsPath& a, const AsPath& b);

/// One periodic ping result.
struct RttMeasurement {
  std::string probe_id;
  Ipv4 target;
  Timestamp timestamp = 0;
  std::vector<double> rtts;  // up to 3 values, milliseconds
  std::optional<Ipv4> responded_ip;

  bool operator==(const RttMeasurement&) const = default;
};

/// One retained RTT value after preprocessing (minimum of a measurement),
/// with a possibly shifted timestamp.
struct RttSample {
  Timestamp timestamp = 0;
  double value = 0.0;  // milliseconds, > 0

  bool operator==(const RttSample&) const = default;
};

/// One routing change observed at a collector peer.
struct BgpUpdate {
  std::string cp_id;
  Ipv4Prefix prefix;
  Timestamp timestamp = 0;
  AsPath as_path;  // empty = withdrawal

  bool is_withdrawal() const { return as_path.empty(); }

  bool operator==(const BgpUpdate&) const = default;
};

/// A persistent shift in the mean of an RTT sample sequence. `index` is the
/// position of the first sample of the new regime; the timestamp is that
/// sample's (possibly shifted) timestamp.
struct Changepoint {
  Timestamp timestamp = 0;
  std::size_t index = 0;  // >= 1
  double mean_before = 0.0;
  double mean_after = 0.0;

  bool operator==(const Changepoint&) const = default;
};

struct TracerouteMeasurement {
  std::string probe_id;
  Ipv4 target;
  Timestamp timestamp = 0;
  std::vector<std::optional<Ipv4>> hops;  // nullopt = null hop ("*")

  bool operator==(const TracerouteMeasurement&) const = default;
};

/// AS-level view of a traceroute path: consecutive duplicates collapsed,
/// IXP AS numbers removed, unmapped hops as kUnknownAs.
struct AsSequence {
  std::vector<Asn> asns;

  bool operator==(const AsSequence&) const = default;
};

/// One preprocessed (valid) BGP update with its matching outcome.
/// `ordinal` is the update's position in the pair's clipped update sequence,
/// which identifies the update across reports for different probes.
struct MatchEntry {
  BgpUpdate update;
  std::size_t ordinal = 0;
  bool matched = false;
  std::vector<Changepoint> matched_changepoints;
};

/// Matching outcome for one (probe, collector peer, target, prefix) run.
struct MatchReport {
  std::string probe_id;
  std::string cp_id;
  Ipv4 target;
  Ipv4Prefix prefix;
  std::vector<MatchEntry> entries;  // valid updates only
  double correlation_factor = 0.0;  // matched / total valid, in [0,1]
  bool insufficient_data = false;   // no valid updates in window
};

/// Inclusive time window on both ends.
struct TimeWindow {
  Timestamp start = 0;
  Timestamp end = std::numeric_limits<Timestamp>::max();

  bool operator==(const TimeWindow&) const = default;
};

/// Tunable parameters of the correlation methodology. Defaults: tolerance
/// window 16 min, RTT period 4 min, penalty schedule p_i = 2^i for i >= 1
/// with p_0 = 0.5, elbow slope threshold 10000.
struct Params {
  TimeWindow time_window;
  std::int64_t time_shift = 0;          // seconds applied to RTT timestamps
  double elbow_slope_threshold = 10000.0;
  std::int64_t tolerance_window = 960;  // seconds
  double penalty_base = 2.0;            // c1 in p_i = c1^i + c2
  double penalty_offset = 0.0;          // c2
  double initial_penalty = 0.5;         // p_0, must sit below c1 + c2
  std::int64_t rtt_period = 240;        // seconds between RTT measurements

  /// Throws Error on any violated invariant (e.g. tolerance_window must
  /// exceed rtt_period, penalty schedule must be strictly increasing).
  void validate() const;
};

/// Traceroute states around two consecutive routing changes:
/// (m_prev, u_prev) before and (m_cur, u_cur) after, with
/// u_prev.timestamp < u_cur.timestamp.
struct Quadruple {
  AsSequence m_prev;
  BgpUpdate u_prev;
  AsSequence m_cur;
  BgpUpdate u_cur;
};

}  // namespace bgprtt
