#include "bgprtt/validate.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include "bgprtt/format.hpp"
#include "json.hpp"

namespace bgprtt::validate {

PrefixTable::PrefixTable(std::span<const ingest::PrefixTableRow> rows,
                         std::vector<Asn> ixp_asns, Asn probe_as)
    : ixp_(ixp_asns.begin(), ixp_asns.end()), probe_as_(probe_as) {
  // Majority election per prefix: highest combined collector count, ties to
  // the lowest AS number. std::map keeps iteration deterministic.
  std::map<Ipv4Prefix, std::map<Asn, std::int64_t>> votes;
  for (const auto& row : rows)
    votes[row.prefix][row.asn] += row.collector_count;

  nodes_.emplace_back();
  for (const auto& [prefix, counts] : votes) {
    Asn winner = 0;
    std::int64_t winner_count = -1;
    for (const auto& [asn, count] : counts) {
      if (count > winner_count) {  // ascending asn order breaks ties low
        winner = asn;
        winner_count = count;
      }
    }
    std::int32_t cur = 0;
    for (int depth = 0; depth < prefix.length; ++depth) {
      const int bit = (prefix.network.value >> (31 - depth)) & 1;
      if (nodes_[cur].child[bit] < 0) {
        nodes_[cur].child[bit] = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
      }
      cur = nodes_[cur].child[bit];
    }
    nodes_[cur].entry = static_cast<std::int32_t>(elected_.size());
    elected_.push_back(winner);
  }
}

std::optional<Asn> PrefixTable::lookup(Ipv4 addr) const {
  std::int32_t cur = 0;
  std::int32_t best = nodes_[0].entry;
  for (int depth = 0; depth < 32; ++depth) {
    const int bit = (addr.value >> (31 - depth)) & 1;
    cur = nodes_[cur].child[bit];
    if (cur < 0) break;
    if (nodes_[cur].entry >= 0) best = nodes_[cur].entry;
  }
  if (best < 0) return std::nullopt;
  return elected_[best];
}

AsSequence map_ip_to_as(const TracerouteMeasurement& traceroute,
                        const PrefixTable& table) {
  std::vector<Asn> raw;
  raw.reserve(traceroute.hops.size());
  std::size_t i = 0;
  while (i < traceroute.hops.size() && traceroute.hops[i] &&
         traceroute.hops[i]->is_private()) {
    raw.push_back(table.probe_as());
    ++i;
  }
  for (; i < traceroute.hops.size(); ++i) {
    const auto& hop = traceroute.hops[i];
    if (!hop) {
      raw.push_back(kUnknownAs);
      continue;
    }
    raw.push_back(table.lookup(*hop).value_or(kUnknownAs));
  }

  auto collapse = [](const std::vector<Asn>& in) {
    std::vector<Asn> out;
    for (Asn a : in)
      if (out.empty() || out.back() != a) out.push_back(a);
    return out;
  };

  std::vector<Asn> collapsed = collapse(raw);
  std::vector<Asn> stripped;
  for (Asn a : collapsed)
    if (!table.is_ixp(a)) stripped.push_back(a);
  return AsSequence{collapse(stripped)};
}

std::vector<IndexedQuadruple> build_quadruples(
    const pipeline::FlaggedUpdates& updates,
    std::vector<TracerouteMeasurement> traceroutes, const PrefixTable& table,
    std::int64_t shift) {
  for (auto& t : traceroutes) {
    if (t.timestamp + shift < 0)
      throw Error("build_quadruples: shift moves a timestamp before the epoch");
    t.timestamp += shift;
  }
  std::stable_sort(traceroutes.begin(), traceroutes.end(),
                   [](const TracerouteMeasurement& a,
                      const TracerouteMeasurement& b) {
                     return a.timestamp < b.timestamp;
                   });

  std::vector<IndexedQuadruple> out;
  const auto& seq = updates.updates;
  if (seq.size() < 3) return out;

  // Mapped AS sequences are computed lazily and memoized per traceroute.
  std::vector<std::optional<AsSequence>> mapped(traceroutes.size());
  auto sequence_of = [&](std::size_t idx) -> const AsSequence& {
    if (!mapped[idx]) mapped[idx] = map_ip_to_as(traceroutes[idx], table);
    return *mapped[idx];
  };

  auto first_at_or_after = [&](Timestamp t) {
    return static_cast<std::size_t>(
        std::lower_bound(traceroutes.begin(), traceroutes.end(), t,
                         [](const TracerouteMeasurement& m, Timestamp v) {
                           return m.timestamp < v;
                         }) -
        traceroutes.begin());
  };
  auto last_at_or_before = [&](Timestamp t) -> std::optional<std::size_t> {
    const auto it =
        std::upper_bound(traceroutes.begin(), traceroutes.end(), t,
                         [](Timestamp v, const TracerouteMeasurement& m) {
                           return v < m.timestamp;
                         });
    if (it == traceroutes.begin()) return std::nullopt;
    return static_cast<std::size_t>(it - traceroutes.begin()) - 1;
  };

  for (std::size_t i = 1; i + 1 < seq.size(); ++i) {
    if (!updates.valid[i]) continue;
    const Timestamp t_prev = seq[i - 1].timestamp;
    const Timestamp t_cur = seq[i].timestamp;
    const Timestamp t_next = seq[i + 1].timestamp;
    if (t_prev >= t_cur) continue;  // keeps the quadruple ordering invariant

    // Latest traceroute in [t_prev, t_cur].
    const auto before = last_at_or_before(t_cur);
    if (!before || traceroutes[*before].timestamp < t_prev) continue;
    // Earliest traceroute in [t_cur, t_next].
    const std::size_t after = first_at_or_after(t_cur);
    if (after >= traceroutes.size() ||
        traceroutes[after].timestamp > t_next)
      continue;

    IndexedQuadruple q;
    q.quad.m_prev = sequence_of(*before);
    q.quad.u_prev = seq[i - 1];
    q.quad.m_cur = sequence_of(after);
    q.quad.u_cur = seq[i];
    q.cur_ordinal = i;
    out.push_back(std::move(q));
  }
  return out;
}

ValidationReport validate_pair(std::span<const IndexedQuadruple> quadruples,
                               const MatchReport& report) {
  ValidationReport out;
  out.probe_id = report.probe_id;
  out.cp_id = report.cp_id;

  std::set<std::size_t> valid_ordinals;
  std::set<std::size_t> matched_ordinals;
  for (const auto& e : report.entries) {
    valid_ordinals.insert(e.ordinal);
    if (e.matched) matched_ordinals.insert(e.ordinal);
  }

  std::size_t validated_plus = 0;
  std::size_t validated_minus = 0;
  for (const auto& iq : quadruples) {
    if (!valid_ordinals.count(iq.cur_ordinal))
      throw Error("validate_pair: quadruple update missing from match report");
    ValidationEntry entry;
    entry.quad = iq.quad;
    entry.cur_ordinal = iq.cur_ordinal;
    entry.in_q_plus = matched_ordinals.count(iq.cur_ordinal) != 0;
    const bool path_changed =
        !as_path_equal(iq.quad.u_prev.as_path, iq.quad.u_cur.as_path);
    const bool trace_changed = !(iq.quad.m_prev == iq.quad.m_cur);
    entry.validated = path_changed && trace_changed;
    if (entry.in_q_plus) {
      ++out.q_plus_size;
      validated_plus += entry.validated ? 1 : 0;
    } else {
      ++out.q_minus_size;
      validated_minus += entry.validated ? 1 : 0;
    }
    out.quadruples.push_back(std::move(entry));
  }

  if (out.q_plus_size > 0)
    out.bgp_traceroute_correlation = static_cast<double>(validated_plus) /
                                     static_cast<double>(out.q_plus_size);
  if (out.q_minus_size > 0)
    out.bgp_traceroute_false_negative = static_cast<double>(validated_minus) /
                                        static_cast<double>(out.q_minus_size);
  return out;
}

void write_validation_csv(std::ostream& out,
                          std::span<const ValidationRow> rows) {
  out << "probe,cp,bgp_rtt_factor,bgp_tr_corr,bgp_tr_fn,q_plus,q_minus\n";
  for (const auto& r : rows) {
    out << r.probe_id << ',' << r.cp_id << ','
        << format_double(r.bgp_rtt_factor) << ',';
    if (r.bgp_tr_corr) out << format_double(*r.bgp_tr_corr);
    out << ',';
    if (r.bgp_tr_fn) out << format_double(*r.bgp_tr_fn);
    out << ',' << r.q_plus << ',' << r.q_minus << '\n';
  }
}

void write_validation_report_json(std::ostream& out,
                                  const ValidationReport& report) {
  using ordered_json = nlohmann::ordered_json;
  ordered_json j;
  j["probe"] = report.probe_id;
  j["cp"] = report.cp_id;
  j["q_plus"] = report.q_plus_size;
  j["q_minus"] = report.q_minus_size;
  if (report.bgp_traceroute_correlation)
    j["bgp_traceroute_correlation"] = *report.bgp_traceroute_correlation;
  else
    j["bgp_traceroute_correlation"] = nullptr;
  if (report.bgp_traceroute_false_negative)
    j["bgp_traceroute_false_negative"] = *report.bgp_traceroute_false_negative;
  else
    j["bgp_traceroute_false_negative"] = nullptr;
  auto quads = ordered_json::array();
  for (const auto& q : report.quadruples) {
    ordered_json jq;
    jq["ordinal"] = q.cur_ordinal;
    jq["ts_prev"] = q.quad.u_prev.timestamp;
    jq["ts_cur"] = q.quad.u_cur.timestamp;
    jq["as_path_prev"] = q.quad.u_prev.as_path;
    jq["as_path_cur"] = q.quad.u_cur.as_path;
    jq["m_prev"] = q.quad.m_prev.asns;
    jq["m_cur"] = q.quad.m_cur.asns;
    jq["in_q_plus"] = q.in_q_plus;
    jq["validated"] = q.validated;
    quads.push_back(std::move(jq));
  }
  j["quadruples"] = std::move(quads);
  out << j.dump() << '\n';
}

}  // namespace bgprtt::validate
