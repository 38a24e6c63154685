#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "connor/csd_oracle.hpp"
#include "connor/graph.hpp"

namespace connor::fixtures {

// The five-vertex example network. Weights are solved so that:
//   (a,b,c) = (6,2)  is the constrained optimum at theta = 4
//   (a,e,b,c) = (8,3)
//   (a,d,e,c) = (5,12) is the unconstrained shortest a -> c
//   d(a,e) = 3 via d; within theta = 4 it is 5 via the direct arc
//   (e,b,c) = (3,2) and (e,c) = (2,6)
inline Graph fig1() {
  enum { a, b, c, d, e };
  const std::vector<Edge> edges{
      {a, b, {5, 1}}, {a, d, {1, 3}}, {a, e, {5, 1}}, {d, e, {2, 3}},
      {e, b, {2, 1}}, {e, c, {2, 6}}, {b, c, {1, 1}},
  };
  return Graph(5, edges, {"a", "b", "c", "d", "e"});
}

// Visits every simple s -> t path with its (dist, cost). With non-negative
// weights no walk with a cycle beats its simple shortcut on either metric.
inline void for_each_simple_path(const Graph& g, VertexId s, VertexId t,
                                 const std::function<void(std::uint64_t, std::uint64_t)>& fn) {
  std::vector<char> on(g.num_vertices(), 0);
  std::function<void(VertexId, std::uint64_t, std::uint64_t)> dfs = [&](VertexId u, std::uint64_t d, std::uint64_t c) {
    if (u == t) {
      fn(d, c);
      return;
    }
    on[u] = 1;
    for (const Arc& a : g.out_arcs(u))
      if (!on[a.to]) dfs(a.to, d + a.attr.dist, c + a.attr.cost);
    on[u] = 0;
  };
  dfs(s, 0, 0);
}

inline std::optional<std::uint64_t> brute_csd(const Graph& g, VertexId s, VertexId t, std::uint64_t theta) {
  std::optional<std::uint64_t> best;
  for_each_simple_path(g, s, t, [&](std::uint64_t d, std::uint64_t c) {
    if (c <= theta && (!best || d < *best)) best = d;
  });
  return best;
}

inline std::vector<ParetoLabel> brute_frontier(const Graph& g, VertexId s, VertexId t) {
  std::vector<ParetoLabel> all;
  for_each_simple_path(g, s, t, [&](std::uint64_t d, std::uint64_t c) { all.push_back({d, c}); });
  std::vector<ParetoLabel> front;
  for (const auto& p : all) {
    bool dominated = std::any_of(all.begin(), all.end(), [&](const ParetoLabel& q) { return dominates(q, p); });
    if (!dominated && std::find(front.begin(), front.end(), p) == front.end()) front.push_back(p);
  }
  std::sort(front.begin(), front.end());
  return front;
}

// Directed G(n, p) with weights uniform on [1, wmax].
inline Graph random_graph(std::size_t n, double p, std::uint32_t wmax, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::uniform_int_distribution<std::uint32_t> w(1, wmax);
  std::vector<Edge> edges;
  for (VertexId u = 0; u < n; ++u)
    for (VertexId v = 0; v < n; ++v)
      if (u != v && coin(rng)) {
        const std::uint32_t d = w(rng);
        edges.push_back({u, v, {d, w(rng)}});
      }
  return Graph(n, edges);
}

}  // namespace connor::fixtures
