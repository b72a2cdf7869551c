#include "bgprtt/ingest.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace bgprtt::ingest {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

json parse_line(const std::string& name, std::size_t line_no,
                const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ParseError(name, line_no, "not a JSON object");
  return j;
}

const json& require(const json& j, const char* key, const std::string& name,
                    std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end())
    throw ParseError(name, line_no, std::string("missing key '") + key + "'");
  return *it;
}

std::string require_string(const json& j, const char* key,
                           const std::string& name, std::size_t line_no) {
  const json& v = require(j, key, name, line_no);
  if (!v.is_string())
    throw ParseError(name, line_no, std::string("key '") + key + "' must be a string");
  return v.get<std::string>();
}

Timestamp require_ts(const json& j, const std::string& name,
                     std::size_t line_no) {
  const json& v = require(j, "ts", name, line_no);
  if (!v.is_number_integer())
    throw ParseError(name, line_no, "key 'ts' must be an integer");
  const Timestamp ts = v.get<Timestamp>();
  if (ts < 0) throw ParseError(name, line_no, "negative timestamp");
  return ts;
}

Ipv4 require_ip(const json& j, const char* key, const std::string& name,
                std::size_t line_no) {
  const std::string s = require_string(j, key, name, line_no);
  auto ip = Ipv4::try_parse(s);
  if (!ip) throw ParseError(name, line_no, "invalid IPv4 address '" + s + "'");
  return *ip;
}

template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(line_no, line);
  }
}

std::ifstream open_input(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open '" + file.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error("cannot open '" + file.string() + "' for writing");
  return out;
}

}  // namespace

std::vector<RttMeasurement> read_rtt(std::istream& in, const std::string& name) {
  std::vector<RttMeasurement> out;
  for_each_line(in, [&](std::size_t line_no, const std::string& line) {
    const json j = parse_line(name, line_no, line);
    RttMeasurement m;
    m.probe_id = require_string(j, "probe", name, line_no);
    m.target = require_ip(j, "target", name, line_no);
    m.timestamp = require_ts(j, name, line_no);
    const json& rtts = require(j, "rtts", name, line_no);
    if (!rtts.is_array())
      throw ParseError(name, line_no, "key 'rtts' must be an array");
    if (rtts.size() > 3)
      throw ParseError(name, line_no, "more than 3 RTT values");
    for (const auto& v : rtts) {
      if (!v.is_number())
        throw ParseError(name, line_no, "RTT values must be numbers");
      const double ms = v.get<double>();
      if (!std::isfinite(ms) || ms <= 0.0)
        throw ParseError(name, line_no, "RTT values must be finite and > 0");
      m.rtts.push_back(ms);
    }
    if (auto it = j.find("ip"); it != j.end() && !it->is_null()) {
      if (!it->is_string())
        throw ParseError(name, line_no, "key 'ip' must be a string or null");
      auto ip = Ipv4::try_parse(it->get<std::string>());
      if (!ip)
        throw ParseError(name, line_no,
                         "invalid IPv4 address '" + it->get<std::string>() + "'");
      m.responded_ip = *ip;
    }
    out.push_back(std::move(m));
  });
  std::stable_sort(out.begin(), out.end(),
                   [](const RttMeasurement& a, const RttMeasurement& b) {
                     return a.timestamp < b.timestamp;
                   });
  return out;
}

std::vector<RttMeasurement> read_rtt(const std::filesystem::path& file) {
  auto in = open_input(file);
  return read_rtt(in, file.string());
}

std::vector<BgpUpdate> read_bgp(std::istream& in, const std::string& name) {
  std::vector<BgpUpdate> out;
  std::unordered_map<std::string, Timestamp> last_ts;
  for_each_line(in, [&](std::size_t line_no, const std::string& line) {
    const json j = parse_line(name, line_no, line);
    BgpUpdate u;
    u.cp_id = require_string(j, "cp", name, line_no);
    const std::string prefix = require_string(j, "prefix", name, line_no);
    try {
      u.prefix = Ipv4Prefix::parse(prefix);
    } catch (const Error& e) {
      throw ParseError(name, line_no, e.what());
    }
    u.timestamp = require_ts(j, name, line_no);
    const json& path = require(j, "as_path", name, line_no);
    if (!path.is_array())
      throw ParseError(name, line_no, "key 'as_path' must be an array");
    for (const auto& v : path) {
      if (!v.is_number_integer() || v.is_number_float())
        throw ParseError(name, line_no, "AS numbers must be integers");
      const std::int64_t asn = v.get<std::int64_t>();
      if (asn <= 0 || asn > 0xFFFFFFFFLL)
        throw ParseError(name, line_no, "AS numbers must be positive 32-bit integers");
      u.as_path.push_back(static_cast<Asn>(asn));
    }
    auto [it, inserted] = last_ts.try_emplace(u.cp_id, u.timestamp);
    if (!inserted) {
      if (u.timestamp < it->second)
        throw ParseError(name, line_no,
                         "out-of-order timestamp for collector peer '" +
                             u.cp_id + "'");
      it->second = u.timestamp;
    }
    out.push_back(std::move(u));
  });
  return out;
}

std::vector<BgpUpdate> read_bgp(const std::filesystem::path& file) {
  auto in = open_input(file);
  return read_bgp(in, file.string());
}

std::vector<TracerouteMeasurement> read_traceroute(std::istream& in,
                                                   const std::string& name) {
  std::vector<TracerouteMeasurement> out;
  for_each_line(in, [&](std::size_t line_no, const std::string& line) {
    const json j = parse_line(name, line_no, line);
    TracerouteMeasurement t;
    t.probe_id = require_string(j, "probe", name, line_no);
    t.target = require_ip(j, "target", name, line_no);
    t.timestamp = require_ts(j, name, line_no);
    const json& hops = require(j, "hops", name, line_no);
    if (!hops.is_array())
      throw ParseError(name, line_no, "key 'hops' must be an array");
    for (const auto& h : hops) {
      if (!h.is_string())
        throw ParseError(name, line_no, "hops must be IP strings or \"*\"");
      const std::string s = h.get<std::string>();
      if (s == "*") {
        t.hops.push_back(std::nullopt);
      } else {
        auto ip = Ipv4::try_parse(s);
        if (!ip)
          throw ParseError(name, line_no, "invalid IPv4 address '" + s + "'");
        t.hops.push_back(*ip);
      }
    }
    out.push_back(std::move(t));
  });
  std::stable_sort(out.begin(), out.end(),
                   [](const TracerouteMeasurement& a,
                      const TracerouteMeasurement& b) {
                     return a.timestamp < b.timestamp;
                   });
  return out;
}

std::vector<TracerouteMeasurement> read_traceroute(
    const std::filesystem::path& file) {
  auto in = open_input(file);
  return read_traceroute(in, file.string());
}

void write_rtt(std::ostream& out, std::span<const RttMeasurement> items) {
  for (const auto& m : items) {
    ordered_json j;
    j["probe"] = m.probe_id;
    j["target"] = m.target.str();
    j["ts"] = m.timestamp;
    j["rtts"] = m.rtts;
    if (m.responded_ip)
      j["ip"] = m.responded_ip->str();
    else
      j["ip"] = nullptr;
    out << j.dump() << '\n';
  }
}

void write_rtt(const std::filesystem::path& file,
               std::span<const RttMeasurement> items) {
  auto out = open_output(file);
  write_rtt(out, items);
}

void write_bgp(std::ostream& out, std::span<const BgpUpdate> items) {
  for (const auto& u : items) {
    ordered_json j;
    j["cp"] = u.cp_id;
    j["prefix"] = u.prefix.str();
    j["ts"] = u.timestamp;
    j["as_path"] = u.as_path;
    out << j.dump() << '\n';
  }
}

void write_bgp(const std::filesystem::path& file,
               std::span<const BgpUpdate> items) {
  auto out = open_output(file);
  write_bgp(out, items);
}

void write_traceroute(std::ostream& out,
                      std::span<const TracerouteMeasurement> items) {
  for (const auto& t : items) {
    ordered_json j;
    j["probe"] = t.probe_id;
    j["target"] = t.target.str();
    j["ts"] = t.timestamp;
    auto hops = ordered_json::array();
    for (const auto& h : t.hops) hops.push_back(h ? h->str() : "*");
    j["hops"] = std::move(hops);
    out << j.dump() << '\n';
  }
}

void write_traceroute(const std::filesystem::path& file,
                      std::span<const TracerouteMeasurement> items) {
  auto out = open_output(file);
  write_traceroute(out, items);
}

std::vector<PrefixTableRow> read_prefix_table(std::istream& in,
                                              const std::string& name) {
  std::vector<PrefixTableRow> out;
  for_each_line(in, [&](std::size_t line_no, const std::string& line) {
    if (line_no == 1 && line.rfind("prefix,", 0) == 0) return;  // header
    std::istringstream ss(line);
    std::string prefix, asn, count;
    if (!std::getline(ss, prefix, ',') || !std::getline(ss, asn, ',') ||
        !std::getline(ss, count))
      throw ParseError(name, line_no, "expected 'prefix,asn,collector_count'");
    PrefixTableRow row;
    try {
      row.prefix = Ipv4Prefix::parse(prefix);
      const std::int64_t a = std::stoll(asn);
      if (a <= 0 || a > 0xFFFFFFFFLL) throw Error("AS number out of range");
      row.asn = static_cast<Asn>(a);
      row.collector_count = std::stoll(count);
      if (row.collector_count < 0) throw Error("negative collector count");
    } catch (const std::exception& e) {
      throw ParseError(name, line_no, e.what());
    }
    out.push_back(row);
  });
  return out;
}

std::vector<PrefixTableRow> read_prefix_table(
    const std::filesystem::path& file) {
  auto in = open_input(file);
  return read_prefix_table(in, file.string());
}

void write_prefix_table(std::ostream& out,
                        std::span<const PrefixTableRow> rows) {
  for (const auto& r : rows)
    out << r.prefix.str() << ',' << r.asn << ',' << r.collector_count << '\n';
}

void write_prefix_table(const std::filesystem::path& file,
                        std::span<const PrefixTableRow> rows) {
  auto out = open_output(file);
  write_prefix_table(out, rows);
}

std::vector<Asn> read_ixp_list(std::istream& in, const std::string& name) {
  std::vector<Asn> out;
  for_each_line(in, [&](std::size_t line_no, const std::string& line) {
    try {
      std::size_t pos = 0;
      const std::int64_t a = std::stoll(line, &pos);
      if (line.find_first_not_of(" \t\r", pos) != std::string::npos)
        throw Error("trailing characters");
      if (a <= 0 || a > 0xFFFFFFFFLL) throw Error("AS number out of range");
      out.push_back(static_cast<Asn>(a));
    } catch (const std::exception& e) {
      throw ParseError(name, line_no, e.what());
    }
  });
  return out;
}

std::vector<Asn> read_ixp_list(const std::filesystem::path& file) {
  auto in = open_input(file);
  return read_ixp_list(in, file.string());
}

void write_ixp_list(std::ostream& out, std::span<const Asn> asns) {
  for (Asn a : asns) out << a << '\n';
}

void write_ixp_list(const std::filesystem::path& file,
                    std::span<const Asn> asns) {
  auto out = open_output(file);
  write_ixp_list(out, asns);
}

}  // namespace bgprtt::ingest
