#include "connor/csd_oracle.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

namespace connor {

namespace {

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("path weight overflow");
  return r;
}

struct Pending {
  ParetoLabel label;
  VertexId vertex;
  std::uint32_t parent;

  // Min-heap on (dist, cost, vertex).
  bool operator>(const Pending& o) const {
    return std::tie(label.dist, label.cost, vertex) > std::tie(o.label.dist, o.label.cost, o.vertex);
  }
};

}  // namespace

ParetoSearch::ParetoSearch(const Graph& g, VertexId source, std::uint64_t cost_cap, Direction dir)
    : at_(g.num_vertices()), dir_(dir) {
  std::vector<std::uint64_t> min_settled_cost(g.num_vertices(), kNoCostCap);
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> heap;
  heap.push({{0, 0}, source, kRoot});

  while (!heap.empty()) {
    Pending p = heap.top();
    heap.pop();
    // Settled labels at this vertex have dist <= p.dist; p survives only if cheaper.
    if (p.label.cost >= min_settled_cost[p.vertex] && min_settled_cost[p.vertex] != kNoCostCap)
      continue;
    min_settled_cost[p.vertex] = p.label.cost;
    const auto id = static_cast<std::uint32_t>(settled_.size());
    settled_.push_back({p.label, p.vertex, p.parent});
    at_[p.vertex].push_back(id);

    auto arcs = dir == Direction::kForward ? g.out_arcs(p.vertex) : g.in_arcs(p.vertex);
    for (const Arc& a : arcs) {
      ParetoLabel next{checked_add(p.label.dist, a.attr.dist), checked_add(p.label.cost, a.attr.cost)};
      if (next.cost > cost_cap) continue;
      if (min_settled_cost[a.to] != kNoCostCap && next.cost >= min_settled_cost[a.to]) continue;
      heap.push({next, a.to, id});
    }
  }
}

std::vector<ParetoLabel> ParetoSearch::frontier(VertexId v) const {
  std::vector<ParetoLabel> out;
  out.reserve(at_[v].size());
  for (auto id : at_[v]) out.push_back(settled_[id].label);
  return out;
}

std::vector<VertexId> ParetoSearch::path(VertexId v, std::size_t i) const {
  std::vector<VertexId> seq;
  for (std::uint32_t id = at_[v].at(i); id != kRoot; id = settled_[id].parent)
    seq.push_back(settled_[id].vertex);
  // Walking parents yields target..source; a forward path reads source..target.
  if (dir_ == Direction::kForward) std::reverse(seq.begin(), seq.end());
  return seq;
}

std::vector<ParetoLabel> pareto_frontier(const Graph& g, VertexId s, VertexId t) {
  return ParetoSearch(g, s).frontier(t);
}

std::optional<std::uint64_t> exact_csd(const Graph& g, const CsdQuery& q) {
  auto f = ParetoSearch(g, q.s, q.theta).frontier(q.t);
  if (f.empty()) return std::nullopt;
  return f.front().dist;
}

std::optional<CostBounds> cost_bounds(const Graph& g, VertexId s, VertexId t) {
  auto f = pareto_frontier(g, s, t);
  if (f.empty()) return std::nullopt;
  return CostBounds{f.back().cost, f.front().cost};
}

}  // namespace connor
