#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "connor/graph.hpp"

namespace connor {

/// (distance, cost) of some path.
struct ParetoLabel {
  std::uint64_t dist = 0;
  std::uint64_t cost = 0;

  friend auto operator<=>(const ParetoLabel&, const ParetoLabel&) = default;
};

/// dist <= and cost <=, with at least one strict.
inline bool dominates(const ParetoLabel& a, const ParetoLabel& b) {
  return a.dist <= b.dist && a.cost <= b.cost && (a.dist < b.dist || a.cost < b.cost);
}

struct CsdQuery {
  VertexId s = 0;
  VertexId t = 0;
  std::uint64_t theta = 0;

  friend bool operator==(const CsdQuery&, const CsdQuery&) = default;
};

struct CostBounds {
  std::uint64_t c_min = 0;
  std::uint64_t c_max = 0;
};

inline constexpr std::uint64_t kNoCostCap = std::numeric_limits<std::uint64_t>::max();

/// Bicriteria label-setting search from a single source.
///
/// Labels leave the heap in (dist, cost, vertex) order, so a popped label is
/// Pareto-optimal at its vertex iff its cost is below every cost already
/// settled there. Settled labels per vertex therefore have increasing
/// distance and strictly decreasing cost. Labels whose cost exceeds `cost_cap`
/// are never generated. Every settled label keeps a parent link, so each
/// frontier point can be turned back into a concrete path.
class ParetoSearch {
 public:
  enum class Direction { kForward, kBackward };

  ParetoSearch(const Graph& g, VertexId source, std::uint64_t cost_cap = kNoCostCap,
               Direction dir = Direction::kForward);

  /// Settled frontier at `v`, ordered by increasing distance.
  std::vector<ParetoLabel> frontier(VertexId v) const;

  /// Vertex sequence realizing the i-th frontier label at `v`. For a backward
  /// search the sequence runs from `v` to the source.
  std::vector<VertexId> path(VertexId v, std::size_t i) const;

 private:
  struct Settled {
    ParetoLabel label;
    VertexId vertex;
    std::uint32_t parent;  // index into settled_, kRoot for the source
  };
  static constexpr std::uint32_t kRoot = std::numeric_limits<std::uint32_t>::max();

  std::vector<Settled> settled_;
  std::vector<std::vector<std::uint32_t>> at_;  // settled_ indices per vertex
  Direction dir_;
};

/// Full Pareto frontier of s->t paths (empty when unreachable), increasing distance.
std::vector<ParetoLabel> pareto_frontier(const Graph& g, VertexId s, VertexId t);

/// Exact constrained shortest distance: min d(P) over s->t paths with c(P) <= theta.
std::optional<std::uint64_t> exact_csd(const Graph& g, const CsdQuery& q);

/// c_min = cheapest s->t path; c_max = cheapest among the shortest-distance paths.
std::optional<CostBounds> cost_bounds(const Graph& g, VertexId s, VertexId t);

}  // namespace connor
