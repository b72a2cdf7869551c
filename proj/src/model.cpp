#include "bgprtt/model.hpp"

#include <cstdio>

namespace bgprtt {

std::optional<Ipv4> Ipv4::try_parse(std::string_view text) {
  std::uint32_t value = 0;
  std::size_t i = 0;
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (i >= text.size() || text[i] != '.') return std::nullopt;
      ++i;
    }
    if (i >= text.size() || text[i] < '0' || text[i] > '9') return std::nullopt;
    std::uint32_t part = 0;
    int digits = 0;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      part = part * 10 + static_cast<std::uint32_t>(text[i] - '0');
      ++digits;
      ++i;
      if (digits > 3 || part > 255) return std::nullopt;
    }
    value = (value << 8) | part;
  }
  if (i != text.size()) return std::nullopt;
  return Ipv4{value};
}

Ipv4 Ipv4::parse(std::string_view text) {
  auto v = try_parse(text);
  if (!v) throw Error("invalid IPv4 address '" + std::string(text) + "'");
  return *v;
}

std::string Ipv4::str() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", (value >> 24) & 0xFF,
                (value >> 16) & 0xFF, (value >> 8) & 0xFF, value & 0xFF);
  return buf;
}

bool Ipv4::is_private() const {
  return (value >> 24) == 10u || (value >> 20) == 0xAC1u ||
         (value >> 16) == 0xC0A8u;
}

Ipv4Prefix Ipv4Prefix::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos)
    throw Error("invalid CIDR prefix '" + std::string(text) + "': missing '/'");
  const Ipv4 addr = Ipv4::parse(text.substr(0, slash));
  const std::string_view len_part = text.substr(slash + 1);
  if (len_part.empty() || len_part.size() > 2)
    throw Error("invalid CIDR prefix '" + std::string(text) + "'");
  int length = 0;
  for (char c : len_part) {
    if (c < '0' || c > '9')
      throw Error("invalid CIDR prefix '" + std::string(text) + "'");
    length = length * 10 + (c - '0');
  }
  if (length > 32)
    throw Error("invalid CIDR prefix '" + std::string(text) + "': length > 32");
  Ipv4Prefix p;
  p.length = length;
  p.network.value =
      length == 0 ? 0u : (addr.value & (~0u << (32 - length)));
  return p;
}

bool Ipv4Prefix::contains(Ipv4 addr) const {
  if (length == 0) return true;
  return ((addr.value ^ network.value) >> (32 - length)) == 0;
}

std::string Ipv4Prefix::str() const {
  return network.str() + "/" + std::to_string(length);
}

bool as_path_equal(const AsPath& a, const AsPath& b) { return a == b; }

void Params::validate() const {
  if (time_window.start < 0)
    throw Error("params: time window start before epoch");
  if (time_window.end < time_window.start)
    throw Error("params: time window end precedes start");
  if (rtt_period <= 0) throw Error("params: rtt_period must be positive");
  if (tolerance_window <= rtt_period)
    throw Error("params: tolerance window must exceed the RTT period");
  if (elbow_slope_threshold <= 0.0)
    throw Error("params: elbow slope threshold must be positive");
  if (penalty_base <= 1.0)
    throw Error("params: penalty base must be greater than 1");
  if (initial_penalty <= 0.0)
    throw Error("params: initial penalty must be positive");
  if (!(initial_penalty < penalty_base + penalty_offset))
    throw Error(
        "params: initial penalty must sit below the first scheduled penalty");
}

}  // namespace bgprtt
