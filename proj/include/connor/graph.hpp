#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "connor/common.hpp"

namespace connor {

using VertexId = std::uint32_t;

struct EdgeAttr {
  std::uint32_t dist = 0;
  std::uint32_t cost = 0;

  friend bool operator==(const EdgeAttr&, const EdgeAttr&) = default;
};

struct Arc {
  VertexId to;
  EdgeAttr attr;

  friend bool operator==(const Arc&, const Arc&) = default;
};

struct Edge {
  VertexId from;
  VertexId to;
  EdgeAttr attr;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Directed simple graph with (distance, cost) per arc.
///
/// Vertices are dense indices 0..n-1; the external label of each vertex is
/// kept in a side table because it is the string fed to the PRFs. Adjacency
/// lists are sorted by neighbour index so iteration order is deterministic.
class Graph {
 public:
  Graph() = default;

  /// Builds from an edge list. Duplicate (u,v) keep the first occurrence;
  /// self-loops throw. `labels` may be empty, in which case vertex i is
  /// labelled by its decimal index.
  Graph(std::size_t n, std::span<const Edge> edges, std::vector<std::string> labels = {});

  std::size_t num_vertices() const { return out_.size(); }
  std::size_t num_edges() const { return m_; }

  std::span<const Arc> out_arcs(VertexId u) const { return out_[u]; }
  std::span<const Arc> in_arcs(VertexId v) const { return in_[v]; }

  /// Edges in ascending (from, to) order.
  std::vector<Edge> edges() const;

  std::optional<EdgeAttr> edge(VertexId u, VertexId v) const;

  const std::string& label(VertexId v) const { return labels_[v]; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<VertexId> find(std::string_view label) const;

  /// True when every label equals the decimal vertex index.
  bool has_identity_labels() const;

  /// Returns a copy with every arc attribute replaced; `attrs` is in edges() order.
  Graph with_attrs(std::span<const EdgeAttr> attrs) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.out_ == b.out_ && a.labels_ == b.labels_;
  }

 private:
  std::vector<std::vector<Arc>> out_;
  std::vector<std::vector<Arc>> in_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, VertexId> by_label_;
  std::size_t m_ = 0;
};

struct ParseOptions {
  bool has_weights = false;
  /// Adds the reverse arc for every line, modelling an undirected input.
  bool undirected = false;
};

/// Parses `u v` / `u v d c` lines; `#` starts a comment line.
Graph parse_edge_list(std::istream& in, const ParseOptions& opts = {});
Graph parse_edge_list(std::string_view text, const ParseOptions& opts = {});

struct WeightSpec {
  std::uint64_t seed = 0;
  std::uint32_t lo = 1;
  std::uint32_t hi = 100;
};

/// Draws dist then cost for every edge in ascending (u,v) order from one
/// seeded mt19937_64 stream, uniform on [lo, hi].
Graph synthesize_weights(const Graph& g, const WeightSpec& spec);

struct PathMetrics {
  std::uint64_t dist = 0;
  std::uint64_t cost = 0;

  friend bool operator==(const PathMetrics&, const PathMetrics&) = default;
};

/// Component-wise sums along `path`; throws Error naming the first missing hop.
PathMetrics path_metrics(const Graph& g, std::span<const VertexId> path);

/// `CNR1` binary cache: u32 n, u32 m, then m (u,v,d,c) u32 records, little-endian.
/// Labels are not part of the format.
Bytes serialize_graph(const Graph& g);
Graph deserialize_graph(ByteView bytes);

/// Writes the edge list as `u v d c` lines (labels as written).
std::string format_edge_list(const Graph& g);

/// Uniform random directed graph with about n*avg_degree arcs.
Graph erdos_renyi(std::size_t n, double avg_degree, std::uint64_t seed);
/// Directed ring lattice with k forward neighbours and rewiring probability p.
Graph small_world(std::size_t n, std::size_t k, double p, std::uint64_t seed);

}  // namespace connor
