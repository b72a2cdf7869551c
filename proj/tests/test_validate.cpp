#include "bgprtt/validate.hpp"

#include <algorithm>
#include <sstream>

#include "bgprtt/rng.hpp"
#include "doctest.h"

using namespace bgprtt;
using namespace bgprtt::validate;
using bgprtt::ingest::PrefixTableRow;

namespace {

PrefixTableRow row(const char* prefix, Asn asn, std::int64_t count) {
  return {Ipv4Prefix::parse(prefix), asn, count};
}

TracerouteMeasurement trace(Timestamp ts,
                            std::initializer_list<const char*> hops) {
  TracerouteMeasurement t;
  t.probe_id = "p1";
  t.target = Ipv4::parse("193.0.14.129");
  t.timestamp = ts;
  for (const char* h : hops) {
    if (std::string_view(h) == "*")
      t.hops.push_back(std::nullopt);
    else
      t.hops.push_back(Ipv4::parse(h));
  }
  return t;
}

BgpUpdate update(Timestamp ts, AsPath path) {
  BgpUpdate u;
  u.cp_id = "cp1";
  u.prefix = Ipv4Prefix::parse("193.0.14.0/24");
  u.timestamp = ts;
  u.as_path = std::move(path);
  return u;
}

}  // namespace

TEST_CASE("prefix table lookups pick the most specific prefix") {
  const std::vector<PrefixTableRow> rows{
      row("193.0.0.0/21", 3333, 10),
      row("193.0.14.0/24", 25152, 12),
      row("0.0.0.0/0", 1, 1),
  };
  const PrefixTable table(rows, {}, 65001);
  CHECK(table.lookup(Ipv4::parse("193.0.14.129")) == 25152);
  CHECK(table.lookup(Ipv4::parse("193.0.0.1")) == 3333);
  CHECK(table.lookup(Ipv4::parse("8.8.8.8")) == 1);  // default route

  const PrefixTable no_default(
      std::vector<PrefixTableRow>{row("193.0.14.0/24", 25152, 12)}, {}, 65001);
  CHECK_FALSE(no_default.lookup(Ipv4::parse("8.8.8.8")).has_value());
}

TEST_CASE("multi-origin prefixes resolve to the majority origin") {
  SUBCASE("higher collector count wins") {
    const std::vector<PrefixTableRow> rows{
        row("10.1.0.0/16", 100, 3),
        row("10.1.0.0/16", 200, 7),
    };
    const PrefixTable table(rows, {}, 1);
    CHECK(table.lookup(Ipv4::parse("10.1.2.3")) == 200);
  }
  SUBCASE("ties break to the lowest AS number") {
    const std::vector<PrefixTableRow> rows{
        row("10.1.0.0/16", 300, 5),
        row("10.1.0.0/16", 100, 5),
    };
    const PrefixTable table(rows, {}, 1);
    CHECK(table.lookup(Ipv4::parse("10.1.2.3")) == 100);
  }
  SUBCASE("duplicate rows accumulate") {
    const std::vector<PrefixTableRow> rows{
        row("10.1.0.0/16", 300, 4),
        row("10.1.0.0/16", 300, 4),
        row("10.1.0.0/16", 100, 7),
    };
    const PrefixTable table(rows, {}, 1);
    CHECK(table.lookup(Ipv4::parse("10.1.2.3")) == 300);  // 8 beats 7
  }
}

TEST_CASE("longest-prefix lookup agrees with a linear scan") {
  SplitMix64 rng(53);
  std::vector<PrefixTableRow> rows;
  for (int i = 0; i < 300; ++i) {
    const int length = static_cast<int>(rng.next_int(0, 32));
    Ipv4Prefix p;
    p.length = length;
    p.network.value =
        length == 0
            ? 0u
            : (static_cast<std::uint32_t>(rng.next()) & (~0u << (32 - length)));
    rows.push_back({p, static_cast<Asn>(rng.next_int(1, 99999)),
                    rng.next_int(1, 20)});
  }
  const PrefixTable table(rows, {}, 1);

  auto linear_scan = [&](Ipv4 addr) -> std::optional<Asn> {
    int best_len = -1;
    for (const auto& r : rows)
      if (r.prefix.contains(addr) && r.prefix.length > best_len)
        best_len = r.prefix.length;
    if (best_len < 0) return std::nullopt;
    // Majority among rows of the winning prefix value.
    std::optional<Asn> winner;
    std::int64_t winner_count = -1;
    std::vector<std::pair<Asn, std::int64_t>> counts;
    for (const auto& r : rows) {
      if (r.prefix.length != best_len || !r.prefix.contains(addr)) continue;
      bool found = false;
      for (auto& [asn, c] : counts)
        if (asn == r.asn) {
          c += r.collector_count;
          found = true;
        }
      if (!found) counts.emplace_back(r.asn, r.collector_count);
    }
    std::sort(counts.begin(), counts.end());
    for (const auto& [asn, c] : counts)
      if (c > winner_count) {
        winner = asn;
        winner_count = c;
      }
    return winner;
  };

  for (int i = 0; i < 2000; ++i) {
    const Ipv4 addr{static_cast<std::uint32_t>(rng.next())};
    CHECK(table.lookup(addr) == linear_scan(addr));
  }
}

TEST_CASE("map_ip_to_as applies the mapping rules") {
  const std::vector<PrefixTableRow> rows{
      row("193.0.14.0/24", 3333, 10),
      row("20.0.0.0/16", 100, 10),  // the IXP block
      row("20.1.0.0/16", 200, 10),
  };
  const PrefixTable probe_is_origin(rows, {}, 3333);

  SUBCASE("leading private hops collapse into the probe AS") {
    const auto seq = map_ip_to_as(
        trace(0, {"10.0.0.1", "10.0.0.2", "193.0.14.129"}), probe_is_origin);
    CHECK(seq.asns == std::vector<Asn>{3333});
  }

  const PrefixTable table(rows, {100}, 65001);
  SUBCASE("IXP AS numbers are removed") {
    const auto seq =
        map_ip_to_as(trace(0, {"192.168.1.1", "20.0.0.5", "20.1.0.9"}), table);
    CHECK(seq.asns == std::vector<Asn>{65001, 200});
  }
  SUBCASE("unmatched hops map to the unknown sentinel") {
    const auto seq = map_ip_to_as(trace(0, {"99.99.99.99"}), table);
    CHECK(seq.asns == std::vector<Asn>{kUnknownAs});
  }
  SUBCASE("null hops map to the unknown sentinel before collapsing") {
    const auto seq = map_ip_to_as(
        trace(0, {"20.1.0.1", "*", "*", "193.0.14.129"}), table);
    CHECK(seq.asns == std::vector<Asn>{200, kUnknownAs, 3333});
  }
  SUBCASE("IXP removal re-collapses newly adjacent duplicates") {
    const auto seq = map_ip_to_as(
        trace(0, {"20.1.0.1", "20.0.0.1", "20.1.0.2"}), table);
    CHECK(seq.asns == std::vector<Asn>{200});
  }
  SUBCASE("private hops after the head are looked up, not probe-mapped") {
    const auto seq =
        map_ip_to_as(trace(0, {"20.1.0.1", "10.0.0.1"}), table);
    CHECK(seq.asns == std::vector<Asn>{200, kUnknownAs});
  }
  SUBCASE("empty hop list maps to an empty sequence") {
    CHECK(map_ip_to_as(trace(0, {}), table).asns.empty());
  }
}

TEST_CASE("mapped sequences satisfy the AsSequence invariants") {
  SplitMix64 rng(59);
  std::vector<PrefixTableRow> rows;
  for (int i = 0; i < 40; ++i) {
    Ipv4Prefix p;
    p.length = 16;
    p.network.value = static_cast<std::uint32_t>(rng.next()) & 0xFFFF0000u;
    rows.push_back({p, static_cast<Asn>(rng.next_int(1, 500)), 5});
  }
  const std::vector<Asn> ixps{7, 13, 21};
  const PrefixTable table(rows, ixps, 65001);
  for (int trial = 0; trial < 100; ++trial) {
    TracerouteMeasurement t;
    t.probe_id = "p";
    t.target = Ipv4{1};
    t.timestamp = trial;
    const int hops = static_cast<int>(rng.next_int(0, 12));
    for (int h = 0; h < hops; ++h) {
      const double roll = rng.next_unit();
      if (roll < 0.15)
        t.hops.push_back(std::nullopt);
      else if (roll < 0.3)
        t.hops.push_back(Ipv4::parse("10.0.0.1"));
      else
        t.hops.push_back(Ipv4{static_cast<std::uint32_t>(rng.next())});
    }
    const auto seq = map_ip_to_as(t, table);
    for (std::size_t i = 1; i < seq.asns.size(); ++i)
      CHECK(seq.asns[i] != seq.asns[i - 1]);
    for (Asn a : seq.asns)
      CHECK(std::find(ixps.begin(), ixps.end(), a) == ixps.end());
  }
}

TEST_CASE("build_quadruples selects stability-window traceroutes") {
  const std::vector<PrefixTableRow> rows{row("20.0.0.0/16", 100, 5),
                                         row("20.1.0.0/16", 200, 5)};
  const PrefixTable table(rows, {}, 65001);

  pipeline::FlaggedUpdates flagged;
  flagged.updates = {update(100, {100}), update(500, {200}),
                     update(900, {100})};
  flagged.valid = {true, true, true};

  SUBCASE("one quadruple for the interior update") {
    std::vector<TracerouteMeasurement> traces{
        trace(300, {"20.0.0.1"}), trace(700, {"20.1.0.1"})};
    const auto quads = build_quadruples(flagged, traces, table, 0);
    REQUIRE(quads.size() == 1);
    CHECK(quads[0].cur_ordinal == 1);
    CHECK(quads[0].quad.u_prev.timestamp == 100);
    CHECK(quads[0].quad.u_cur.timestamp == 500);
    CHECK(quads[0].quad.m_prev.asns == std::vector<Asn>{100});
    CHECK(quads[0].quad.m_cur.asns == std::vector<Asn>{200});
  }
  SUBCASE("an empty before-window discards the update") {
    std::vector<TracerouteMeasurement> traces{trace(700, {"20.1.0.1"})};
    CHECK(build_quadruples(flagged, traces, table, 0).empty());
  }
  SUBCASE("an empty after-window discards the update") {
    std::vector<TracerouteMeasurement> traces{trace(300, {"20.0.0.1"})};
    CHECK(build_quadruples(flagged, traces, table, 0).empty());
  }
  SUBCASE("first and last updates never yield quadruples") {
    std::vector<TracerouteMeasurement> traces;
    for (Timestamp t = 0; t <= 1000; t += 50)
      traces.push_back(trace(t, {"20.0.0.1"}));
    const auto quads = build_quadruples(flagged, traces, table, 0);
    REQUIRE(quads.size() == 1);
    CHECK(quads[0].cur_ordinal == 1);
  }
  SUBCASE("fewer than 3 updates yields nothing") {
    pipeline::FlaggedUpdates two;
    two.updates = {update(100, {100}), update(500, {200})};
    two.valid = {true, true};
    std::vector<TracerouteMeasurement> traces{trace(300, {"20.0.0.1"})};
    CHECK(build_quadruples(two, traces, table, 0).empty());
  }
  SUBCASE("invalid interior updates are skipped") {
    pipeline::FlaggedUpdates inv = flagged;
    inv.valid = {true, false, true};
    std::vector<TracerouteMeasurement> traces{trace(300, {"20.0.0.1"}),
                                              trace(700, {"20.1.0.1"})};
    CHECK(build_quadruples(inv, traces, table, 0).empty());
  }
  SUBCASE("window endpoints are inclusive") {
    std::vector<TracerouteMeasurement> traces{trace(100, {"20.0.0.1"}),
                                              trace(900, {"20.1.0.1"})};
    const auto quads = build_quadruples(flagged, traces, table, 0);
    REQUIRE(quads.size() == 1);
    CHECK(quads[0].quad.m_prev.asns == std::vector<Asn>{100});
    CHECK(quads[0].quad.m_cur.asns == std::vector<Asn>{200});
  }
}

TEST_CASE("validation CSV leaves undefined factors empty") {
  std::vector<ValidationRow> rows;
  ValidationRow r;
  r.probe_id = "p1";
  r.cp_id = "cp1";
  r.bgp_rtt_factor = 0.5;
  r.bgp_tr_corr = std::nullopt;  // |Q+| = 0
  r.bgp_tr_fn = 0.25;
  r.q_plus = 0;
  r.q_minus = 4;
  rows.push_back(r);
  std::ostringstream out;
  write_validation_csv(out, rows);
  CHECK(out.str() ==
        "probe,cp,bgp_rtt_factor,bgp_tr_corr,bgp_tr_fn,q_plus,q_minus\n"
        "p1,cp1,0.5,,0.25,0,4\n");
}

TEST_CASE("validate_pair splits Q+ and Q- and computes both factors") {
  // Quadruples: ordinals 1 and 2 with changed paths and traces; ordinal 3
  // with nothing changed.
  auto make_quad = [](std::size_t ordinal, bool path_change,
                      bool trace_change) {
    IndexedQuadruple q;
    q.cur_ordinal = ordinal;
    q.quad.u_prev = update(100 * static_cast<Timestamp>(ordinal), {100});
    q.quad.u_cur = update(100 * static_cast<Timestamp>(ordinal) + 50,
                          path_change ? AsPath{200} : AsPath{100});
    q.quad.m_prev.asns = {100};
    q.quad.m_cur.asns = trace_change ? std::vector<Asn>{200}
                                     : std::vector<Asn>{100};
    return q;
  };

  MatchReport report;
  report.probe_id = "p1";
  report.cp_id = "cp1";
  auto add_entry = [&](std::size_t ordinal, bool matched) {
    MatchEntry e;
    e.ordinal = ordinal;
    e.matched = matched;
    report.entries.push_back(e);
  };
  add_entry(1, true);
  add_entry(2, true);
  add_entry(3, false);

  const std::vector<IndexedQuadruple> quads{
      make_quad(1, true, true), make_quad(2, true, true),
      make_quad(3, false, false)};
  const auto vr = validate_pair(quads, report);
  CHECK(vr.q_plus_size == 2);
  CHECK(vr.q_minus_size == 1);
  CHECK(vr.q_plus_size + vr.q_minus_size == vr.quadruples.size());
  REQUIRE(vr.bgp_traceroute_correlation.has_value());
  CHECK(*vr.bgp_traceroute_correlation == doctest::Approx(1.0));
  REQUIRE(vr.bgp_traceroute_false_negative.has_value());
  CHECK(*vr.bgp_traceroute_false_negative == doctest::Approx(0.0));

  SUBCASE("withdrawal versus announcement counts as a path change") {
    auto q = make_quad(1, false, true);
    q.quad.u_cur.as_path.clear();
    const auto r = validate_pair(std::vector<IndexedQuadruple>{q}, report);
    REQUIRE(r.quadruples.size() == 1);
    CHECK(r.quadruples[0].validated);
  }
  SUBCASE("sentinel-only trace differences count as a change") {
    auto q = make_quad(1, true, false);
    q.quad.m_cur.asns = {100, kUnknownAs};
    const auto r = validate_pair(std::vector<IndexedQuadruple>{q}, report);
    CHECK(r.quadruples[0].validated);
  }
  SUBCASE("empty denominators leave factors undefined") {
    const std::vector<IndexedQuadruple> only_plus{make_quad(1, true, true)};
    const auto r = validate_pair(only_plus, report);
    CHECK(r.bgp_traceroute_correlation.has_value());
    CHECK_FALSE(r.bgp_traceroute_false_negative.has_value());
  }
  SUBCASE("quadruples missing from the report are rejected") {
    const std::vector<IndexedQuadruple> stray{make_quad(9, true, true)};
    CHECK_THROWS_AS(validate_pair(stray, report), Error);
  }
  SUBCASE("determinism") {
    const auto again = validate_pair(quads, report);
    CHECK(again.q_plus_size == vr.q_plus_size);
    CHECK(again.bgp_traceroute_correlation == vr.bgp_traceroute_correlation);
    REQUIRE(again.quadruples.size() == vr.quadruples.size());
    for (std::size_t i = 0; i < again.quadruples.size(); ++i) {
      CHECK(again.quadruples[i].validated == vr.quadruples[i].validated);
      CHECK(again.quadruples[i].in_q_plus == vr.quadruples[i].in_q_plus);
    }
  }
}
