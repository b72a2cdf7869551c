#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bgprtt/model.hpp"

namespace bgprtt::ingest {

/// Format violation in an input file; the message carries file and line.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Record formats, one JSON object per line:
//   RTT        {"probe":"p1","target":"193.0.14.129","ts":1325376000,
//               "rtts":[12.3,11.8,14.1],"ip":"193.0.14.129"}
//   BGP        {"cp":"cp1","prefix":"193.0.14.0/24","ts":1325376000,
//               "as_path":[3333,1103]}          (empty as_path = withdrawal)
//   traceroute {"probe":"p1","target":"193.0.14.129","ts":1325376000,
//               "hops":["10.0.0.1","*","193.0.14.129"]}  ("*" = null hop)

/// Returned in nondecreasing timestamp order (stable-sorted).
std::vector<RttMeasurement> read_rtt(const std::filesystem::path& file);
std::vector<RttMeasurement> read_rtt(std::istream& in, const std::string& name);

/// Timestamps must be nondecreasing per collector peer; violations are
/// reported as ParseError. File order is preserved.
std::vector<BgpUpdate> read_bgp(const std::filesystem::path& file);
std::vector<BgpUpdate> read_bgp(std::istream& in, const std::string& name);

/// Returned in nondecreasing timestamp order (stable-sorted). Hop lists
/// preserve order and null positions.
std::vector<TracerouteMeasurement> read_traceroute(
    const std::filesystem::path& file);
std::vector<TracerouteMeasurement> read_traceroute(std::istream& in,
                                                   const std::string& name);

void write_rtt(std::ostream& out, std::span<const RttMeasurement> items);
void write_rtt(const std::filesystem::path& file,
               std::span<const RttMeasurement> items);
void write_bgp(std::ostream& out, std::span<const BgpUpdate> items);
void write_bgp(const std::filesystem::path& file,
               std::span<const BgpUpdate> items);
void write_traceroute(std::ostream& out,
                      std::span<const TracerouteMeasurement> items);
void write_traceroute(const std::filesystem::path& file,
                      std::span<const TracerouteMeasurement> items);

/// One row of the IP-prefix origin table: CSV "prefix,asn,collector_count".
struct PrefixTableRow {
  Ipv4Prefix prefix;
  Asn asn = 0;
  std::int64_t collector_count = 0;

  bool operator==(const PrefixTableRow&) const = default;
};

std::vector<PrefixTableRow> read_prefix_table(const std::filesystem::path& file);
std::vector<PrefixTableRow> read_prefix_table(std::istream& in,
                                              const std::string& name);
void write_prefix_table(std::ostream& out, std::span<const PrefixTableRow> rows);
void write_prefix_table(const std::filesystem::path& file,
                        std::span<const PrefixTableRow> rows);

/// One AS number per line.
std::vector<Asn> read_ixp_list(const std::filesystem::path& file);
std::vector<Asn> read_ixp_list(std::istream& in, const std::string& name);
void write_ixp_list(std::ostream& out, std::span<const Asn> asns);
void write_ixp_list(const std::filesystem::path& file, std::span<const Asn> asns);

/// Keeps items with window.start <= timestamp <= window.end. Input must be
/// sorted by timestamp; the result is a contiguous subsequence of it.
template <typename T>
std::vector<T> clip_window(std::span<const T> items, TimeWindow window) {
  if (window.start > window.end) return {};
  auto lo = std::lower_bound(
      items.begin(), items.end(), window.start,
      [](const T& item, Timestamp t) { return item.timestamp < t; });
  auto hi = std::upper_bound(
      lo, items.end(), window.end,
      [](Timestamp t, const T& item) { return t < item.timestamp; });
  return std::vector<T>(lo, hi);
}

template <typename T>
std::vector<T> clip_window(const std::vector<T>& items, TimeWindow window) {
  return clip_window(std::span<const T>(items), window);
}

}  // namespace bgprtt::ingest
