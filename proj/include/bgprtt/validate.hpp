#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bgprtt/ingest.hpp"
#include "bgprtt/model.hpp"
#include "bgprtt/pipeline.hpp"

namespace bgprtt::validate {

/// Longest-prefix-match table from CIDR prefixes to origin AS numbers, plus
/// the IXP AS set and the AS of the probe. When several ASes originate the
/// same prefix the one seen by most collectors wins; ties go to the lowest
/// AS number. Built once, then read-only.
class PrefixTable {
 public:
  PrefixTable(std::span<const ingest::PrefixTableRow> rows,
              std::vector<Asn> ixp_asns, Asn probe_as);

  /// Majority origin of the most specific prefix containing the address, or
  /// nullopt when no prefix matches.
  std::optional<Asn> lookup(Ipv4 addr) const;

  bool is_ixp(Asn asn) const { return ixp_.count(asn) != 0; }
  Asn probe_as() const { return probe_as_; }

 private:
  struct Node {
    std::int32_t child[2] = {-1, -1};
    std::int32_t entry = -1;
  };
  std::vector<Node> nodes_;
  std::vector<Asn> elected_;
  std::set<Asn> ixp_;
  Asn probe_as_;
};

/// Maps a traceroute to its AS-level path: leading private addresses become
/// the probe's AS, every other address the majority origin of its most
/// specific prefix (unknown sentinel when nothing matches, and for null
/// hops), then consecutive duplicates are collapsed and IXP AS numbers
/// removed. Removal can make former IXP neighbors adjacent, so the sequence
/// is re-collapsed to keep the no-duplicate invariant.
AsSequence map_ip_to_as(const TracerouteMeasurement& traceroute,
                        const PrefixTable& table);

/// A quadruple plus the ordinal of u_cur in the pair's update sequence,
/// which ties it back to the match report.
struct IndexedQuadruple {
  Quadruple quad;
  std::size_t cur_ordinal = 0;
};

/// Builds one quadruple per valid interior update u_i: the AS sequences of
/// the latest traceroute in [t_{i-1}, t_i] and the earliest in
/// [t_i, t_{i+1}] (both windows inclusive), together with u_{i-1} and u_i.
/// Updates whose stability windows hold no traceroute are discarded, as are
/// the first and last updates and pairs with equal timestamps. Traceroutes
/// are time-aligned with the same shift as the RTT samples.
std::vector<IndexedQuadruple> build_quadruples(
    const pipeline::FlaggedUpdates& updates,
    std::vector<TracerouteMeasurement> traceroutes, const PrefixTable& table,
    std::int64_t shift);

struct ValidationEntry {
  Quadruple quad;
  std::size_t cur_ordinal = 0;
  bool in_q_plus = false;
  bool validated = false;
};

struct ValidationReport {
  std::string probe_id;
  std::string cp_id;
  std::vector<ValidationEntry> quadruples;
  /// validated Q+ over |Q+|; absent when |Q+| = 0.
  std::optional<double> bgp_traceroute_correlation;
  /// validated Q- over |Q-|; absent when |Q-| = 0.
  std::optional<double> bgp_traceroute_false_negative;
  std::size_t q_plus_size = 0;
  std::size_t q_minus_size = 0;
};

/// Splits the quadruples into Q+ (u_cur matched in the report) and Q-, marks
/// each validated when both the AS-path and the traceroute AS sequence
/// changed, and computes the two factors. The report must cover the same
/// update sequence the quadruples were built from.
ValidationReport validate_pair(std::span<const IndexedQuadruple> quadruples,
                               const MatchReport& report);

struct ValidationRow {
  std::string probe_id;
  std::string cp_id;
  double bgp_rtt_factor = 0.0;
  std::optional<double> bgp_tr_corr;
  std::optional<double> bgp_tr_fn;
  std::size_t q_plus = 0;
  std::size_t q_minus = 0;
};

/// Columns: probe,cp,bgp_rtt_factor,bgp_tr_corr,bgp_tr_fn,q_plus,q_minus.
/// Undefined factors are left empty.
void write_validation_csv(std::ostream& out,
                          std::span<const ValidationRow> rows);

void write_validation_report_json(std::ostream& out,
                                  const ValidationReport& report);

}  // namespace bgprtt::validate
