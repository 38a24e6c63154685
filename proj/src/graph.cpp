#include "connor/graph.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace connor {

namespace {

bool is_decimal(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Uniform integer on [lo, hi] by rejection; independent of the standard
// library's distribution implementation so seeds reproduce across toolchains.
std::uint64_t uniform_in(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  const std::uint64_t span = hi - lo + 1;
  if (span == 0) return rng();
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return lo + x % span;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Graph::Graph(std::size_t n, std::span<const Edge> edges, std::vector<std::string> labels)
    : out_(n), in_(n), labels_(std::move(labels)) {
  if (labels_.empty()) {
    labels_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) labels_.push_back(std::to_string(i));
  }
  if (labels_.size() != n) throw Error("label table size does not match vertex count");
  for (VertexId v = 0; v < n; ++v) {
    if (!by_label_.emplace(labels_[v], v).second)
      throw Error("duplicate vertex label '" + labels_[v] + "'");
  }

  std::set<std::pair<VertexId, VertexId>> seen;
  for (const Edge& e : edges) {
    if (e.from >= n || e.to >= n) throw Error("edge endpoint out of range");
    if (e.from == e.to) throw Error("self-loop on vertex " + labels_[e.from]);
    if (!seen.emplace(e.from, e.to).second) continue;
    out_[e.from].push_back({e.to, e.attr});
    in_[e.to].push_back({e.from, e.attr});
    ++m_;
  }
  auto by_neighbour = [](const Arc& a, const Arc& b) { return a.to < b.to; };
  for (auto& list : out_) std::sort(list.begin(), list.end(), by_neighbour);
  for (auto& list : in_) std::sort(list.begin(), list.end(), by_neighbour);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> result;
  result.reserve(m_);
  for (VertexId u = 0; u < out_.size(); ++u)
    for (const Arc& a : out_[u]) result.push_back({u, a.to, a.attr});
  return result;
}

std::optional<EdgeAttr> Graph::edge(VertexId u, VertexId v) const {
  const auto& list = out_.at(u);
  auto it = std::lower_bound(list.begin(), list.end(), v,
                             [](const Arc& a, VertexId x) { return a.to < x; });
  if (it == list.end() || it->to != v) return std::nullopt;
  return it->attr;
}

std::optional<VertexId> Graph::find(std::string_view label) const {
  auto it = by_label_.find(std::string(label));
  if (it == by_label_.end()) return std::nullopt;
  return it->second;
}

bool Graph::has_identity_labels() const {
  for (VertexId v = 0; v < labels_.size(); ++v)
    if (labels_[v] != std::to_string(v)) return false;
  return true;
}

Graph Graph::with_attrs(std::span<const EdgeAttr> attrs) const {
  auto list = edges();
  if (attrs.size() != list.size()) throw Error("attribute count does not match edge count");
  for (std::size_t i = 0; i < list.size(); ++i) list[i].attr = attrs[i];
  return Graph(num_vertices(), list, labels_);
}

Graph parse_edge_list(std::istream& in, const ParseOptions& opts) {
  struct RawEdge {
    std::string u, v;
    EdgeAttr attr;
    std::size_t line;
  };
  std::vector<RawEdge> raw;
  std::vector<std::string> order;  // first-appearance order
  std::unordered_map<std::string, bool> known;

  auto note = [&](const std::string& s) {
    if (known.emplace(s, true).second) order.push_back(s);
  };

  auto parse_weight = [](const std::string& tok, std::size_t line) -> std::uint32_t {
    if (!tok.empty() && tok[0] == '-') throw ParseError(line, "negative weight '" + tok + "'");
    std::uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw ParseError(line, "invalid weight '" + tok + "'");
    return value;
  };

  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    auto first = text.find_first_not_of(" \t");
    if (first == std::string::npos || text[first] == '#') continue;

    std::istringstream fields(text);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(std::move(t));

    const std::size_t want = opts.has_weights ? 4 : 2;
    if (tok.size() != want)
      throw ParseError(line_no, "expected " + std::to_string(want) + " fields, found " +
                                    std::to_string(tok.size()));
    if (tok[0] == tok[1]) throw ParseError(line_no, "self-loop on vertex '" + tok[0] + "'");

    RawEdge e{tok[0], tok[1], {}, line_no};
    if (opts.has_weights) e.attr = {parse_weight(tok[2], line_no), parse_weight(tok[3], line_no)};
    note(e.u);
    note(e.v);
    raw.push_back(e);
    if (opts.undirected) raw.push_back({e.v, e.u, e.attr, line_no});
  }

  // Numeric labels are indexed in numeric order (so SNAP ids keep their
  // relative order); anything else is indexed by first appearance.
  const bool numeric = std::all_of(order.begin(), order.end(), [](const std::string& s) {
    return is_decimal(s) && s.size() < 20;
  });
  if (numeric) {
    std::sort(order.begin(), order.end(), [](const std::string& a, const std::string& b) {
      const auto x = std::stoull(a), y = std::stoull(b);
      return x != y ? x < y : a < b;
    });
  }
  std::unordered_map<std::string, VertexId> index;
  for (VertexId i = 0; i < order.size(); ++i) index.emplace(order[i], i);

  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const auto& e : raw) edges.push_back({index.at(e.u), index.at(e.v), e.attr});
  const std::size_t n = order.size();
  return Graph(n, edges, std::move(order));
}

Graph parse_edge_list(std::string_view text, const ParseOptions& opts) {
  std::istringstream in{std::string(text)};
  return parse_edge_list(in, opts);
}

Graph synthesize_weights(const Graph& g, const WeightSpec& spec) {
  if (spec.lo < 1 || spec.lo > spec.hi) throw Error("weight range must satisfy 1 <= lo <= hi");
  std::mt19937_64 rng(spec.seed);
  std::vector<EdgeAttr> attrs;
  attrs.reserve(g.num_edges());
  for (std::size_t i = 0; i < g.num_edges(); ++i) {
    EdgeAttr a;
    a.dist = static_cast<std::uint32_t>(uniform_in(rng, spec.lo, spec.hi));
    a.cost = static_cast<std::uint32_t>(uniform_in(rng, spec.lo, spec.hi));
    attrs.push_back(a);
  }
  return g.with_attrs(attrs);
}

PathMetrics path_metrics(const Graph& g, std::span<const VertexId> path) {
  PathMetrics m;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    auto e = g.edge(path[i], path[i + 1]);
    if (!e)
      throw Error("no edge for hop " + std::to_string(i) + " (" + g.label(path[i]) + " -> " +
                  g.label(path[i + 1]) + ")");
    m.dist += e->dist;
    m.cost += e->cost;
  }
  return m;
}

Bytes serialize_graph(const Graph& g) {
  ByteWriter w;
  w.put("CNR1");
  w.put_le(g.num_vertices(), 4);
  w.put_le(g.num_edges(), 4);
  for (const Edge& e : g.edges()) {
    w.put_le(e.from, 4);
    w.put_le(e.to, 4);
    w.put_le(e.attr.dist, 4);
    w.put_le(e.attr.cost, 4);
  }
  return w.take();
}

Graph deserialize_graph(ByteView bytes) {
  ByteReader r(bytes);
  r.expect_magic("CNR1");
  const auto n = static_cast<std::size_t>(r.le(4));
  const auto m = static_cast<std::size_t>(r.le(4));
  if (r.remaining() != m * 16) throw FormatError("graph record count does not match payload size");
  std::vector<Edge> edges(m);
  for (auto& e : edges) {
    e.from = static_cast<VertexId>(r.le(4));
    e.to = static_cast<VertexId>(r.le(4));
    e.attr.dist = static_cast<std::uint32_t>(r.le(4));
    e.attr.cost = static_cast<std::uint32_t>(r.le(4));
    if (e.from >= n || e.to >= n) throw FormatError("edge endpoint out of range");
  }
  return Graph(n, edges);
}

std::string format_edge_list(const Graph& g) {
  std::string out;
  for (const Edge& e : g.edges()) {
    out += g.label(e.from) + ' ' + g.label(e.to) + ' ' + std::to_string(e.attr.dist) + ' ' +
           std::to_string(e.attr.cost) + '\n';
  }
  return out;
}

Graph erdos_renyi(std::size_t n, double avg_degree, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Edge> edges;
  if (n < 2) return Graph(n, edges);
  const auto target = static_cast<std::size_t>(avg_degree * static_cast<double>(n));
  const std::size_t max_edges = n * (n - 1);
  std::set<std::pair<VertexId, VertexId>> seen;
  while (seen.size() < std::min(target, max_edges)) {
    auto u = static_cast<VertexId>(uniform_in(rng, 0, n - 1));
    auto v = static_cast<VertexId>(uniform_in(rng, 0, n - 1));
    if (u != v) seen.emplace(u, v);
  }
  for (auto [u, v] : seen) edges.push_back({u, v, {}});
  return Graph(n, edges);
}

Graph small_world(std::size_t n, std::size_t k, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::set<std::pair<VertexId, VertexId>> seen;
  for (VertexId u = 0; u < n; ++u) {
    for (std::size_t j = 1; j <= k && j < n; ++j) {
      auto v = static_cast<VertexId>((u + j) % n);
      if (uniform01(rng) < p && k + 1 < n) {
        do {
          v = static_cast<VertexId>(uniform_in(rng, 0, n - 1));
        } while (v == u || seen.count({u, v}));
      }
      seen.emplace(u, v);
    }
  }
  std::vector<Edge> edges;
  for (auto [u, v] : seen) edges.push_back({u, v, {}});
  return Graph(n, edges);
}

}  // namespace connor
