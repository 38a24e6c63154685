#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "connor/csd_oracle.hpp"
#include "connor/graph.hpp"

namespace connor {

/// Exact approximation ratio num/den >= 1.
struct Rational {
  std::uint32_t num = 1;
  std::uint32_t den = 1;

  /// Accepts "3/2", "1.5" or "2".
  static Rational parse(std::string_view text);
  std::string to_string() const;
  double value() const { return static_cast<double>(num) / den; }

  friend bool operator==(const Rational&, const Rational&) = default;
};

/// c1 <= c2 and d1 <= alpha * d2, evaluated in exact integer arithmetic.
bool alpha_dominates(const ParetoLabel& e1, const ParetoLabel& e2, const Rational& alpha);

struct SketchEntry {
  VertexId hub = 0;
  std::uint32_t dist = 0;
  std::uint32_t cost = 0;

  friend bool operator==(const SketchEntry&, const SketchEntry&) = default;
};

/// Plain constrained 2-hop cover labeling.
///
/// `out[u]` holds entries (hub, d, c) for paths u -> hub, `in[v]` holds
/// entries for paths hub -> v. Each sketch is sorted by (hub, cost); every
/// vertex is its own hub with a (0, 0) entry on both sides.
struct LabelIndex {
  Rational alpha;
  std::vector<std::vector<SketchEntry>> out;
  std::vector<std::vector<SketchEntry>> in;
  std::uint32_t max_dist_B = 0;

  std::size_t num_vertices() const { return out.size(); }
  std::size_t out_entries() const;
  std::size_t in_entries() const;

  friend bool operator==(const LabelIndex&, const LabelIndex&) = default;
};

struct BuildOptions {
  /// Hard cap on entries per sketch; 0 disables it. Exceeding it logs a
  /// warning and keeps the cheapest entries, which voids the alpha guarantee.
  std::size_t sketch_cap = 0;
  /// Record the concrete path behind every entry (for soundness checks).
  bool record_paths = false;
};

/// Concrete paths parallel to LabelIndex::out / ::in when recorded.
struct EntryPaths {
  std::vector<std::vector<std::vector<VertexId>>> out;
  std::vector<std::vector<std::vector<VertexId>>> in;
};

/// Builds the index by pruned landmark searches.
///
/// Landmarks are taken by descending total degree (ties by index). From each
/// landmark a forward and a backward Pareto search run; a settled label is
/// pruned when the index built so far already has a hub pair whose distance
/// and cost are both no larger. The surviving frontier for each
/// (vertex, landmark) is then thinned to an alpha-cover in ascending cost
/// order, so every dropped label is alpha-dominated by a kept one.
LabelIndex build_index(const Graph& g, const Rational& alpha, const BuildOptions& opts = {},
                       EntryPaths* paths = nullptr);

struct HubPair {
  VertexId hub = 0;
  SketchEntry out_entry;  // s -> hub
  SketchEntry in_entry;   // hub -> t

  std::uint64_t dist() const { return std::uint64_t{out_entry.dist} + in_entry.dist; }
  std::uint64_t cost() const { return std::uint64_t{out_entry.cost} + in_entry.cost; }
};

/// Every (out(s), in(t)) entry pair sharing a hub, in hub order.
std::vector<HubPair> hub_pairs(const LabelIndex& idx, VertexId s, VertexId t);

/// Min d(s,v)+d(v,t) over hub pairs with c(s,v)+c(v,t) <= theta. Ties prefer
/// lower cost, then lower hub index.
std::optional<HubPair> plain_query(const LabelIndex& idx, const CsdQuery& q);

/// `CNL1` index file, little-endian.
Bytes serialize_label_index(const LabelIndex& idx);
LabelIndex deserialize_label_index(ByteView bytes);

}  // namespace connor
