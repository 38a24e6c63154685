#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "connor/graph.hpp"
#include "support.hpp"

using namespace connor;

TEST(Parse, WeightedLines) {
  Graph g = parse_edge_list("0 1 3 2\n1 2 3 2", {.has_weights = true});
  EXPECT_EQ(g.num_vertices(), 3u);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.edge(0, 1), (EdgeAttr{3, 2}));
  EXPECT_EQ(g.edge(1, 2), (EdgeAttr{3, 2}));
  EXPECT_FALSE(g.edge(1, 0));
}

TEST(Parse, CommentsAndDuplicatesCollapse) {
  Graph g = parse_edge_list("# c\n0 1\n0 1\n");
  EXPECT_EQ(g.num_vertices(), 2u);
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_EQ(g.edge(0, 1), (EdgeAttr{0, 0}));
}

TEST(Parse, DuplicateKeepsFirstOccurrence) {
  Graph g = parse_edge_list("0 1 5 6\n0 1 1 1\n", {.has_weights = true});
  EXPECT_EQ(g.edge(0, 1), (EdgeAttr{5, 6}));
}

TEST(Parse, SelfLoopReportsLine) {
  try {
    parse_edge_list("0 0 1 1", {.has_weights = true});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find("self-loop"), std::string::npos);
  }
  try {
    parse_edge_list("0 1\n# x\n2 2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Parse, MalformedAndNegative) {
  try {
    parse_edge_list("0 1\n1 2 3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_edge_list("0 1 -3 2", {.has_weights = true}), ParseError);
  EXPECT_THROW(parse_edge_list("0 1 x 2", {.has_weights = true}), ParseError);
  EXPECT_THROW(parse_edge_list("0 1 3 2", {.has_weights = false}), ParseError);
}

TEST(Parse, SparseAndStringLabels) {
  Graph g = parse_edge_list("100 7\n7 alpha\n");
  EXPECT_EQ(g.num_vertices(), 3u);
  auto a = g.find("100"), b = g.find("7"), c = g.find("alpha");
  ASSERT_TRUE(a && b && c);
  EXPECT_TRUE(g.edge(*a, *b));
  EXPECT_TRUE(g.edge(*b, *c));
  // The label map is a bijection onto 0..n-1.
  std::vector<VertexId> ids{*a, *b, *c};
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(ids, (std::vector<VertexId>{0, 1, 2}));
}

TEST(Parse, UndirectedAddsReverse) {
  Graph g = parse_edge_list("0 1 4 5\n", {.has_weights = true, .undirected = true});
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.edge(1, 0), (EdgeAttr{4, 5}));
}

TEST(Graph, AdjacencyConsistency) {
  Graph g = erdos_renyi(200, 4.0, 3);
  std::size_t out = 0, in = 0;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    out += g.out_arcs(v).size();
    in += g.in_arcs(v).size();
    for (const Arc& a : g.out_arcs(v)) {
      auto back = g.in_arcs(a.to);
      EXPECT_TRUE(std::any_of(back.begin(), back.end(), [&](const Arc& b) { return b.to == v && b.attr == a.attr; }));
    }
  }
  EXPECT_EQ(out, g.num_edges());
  EXPECT_EQ(in, g.num_edges());
}

TEST(Graph, SelfLoopRejectedInConstructor) {
  const std::vector<Edge> e{{1, 1, {1, 1}}};
  EXPECT_THROW(Graph(2, e), Error);
}

TEST(Weights, Deterministic) {
  Graph g = erdos_renyi(300, 4.0, 9);
  EXPECT_EQ(serialize_graph(synthesize_weights(g, {42, 1, 100})), serialize_graph(synthesize_weights(g, {42, 1, 100})));
  EXPECT_NE(serialize_graph(synthesize_weights(g, {42, 1, 100})), serialize_graph(synthesize_weights(g, {43, 1, 100})));
}

TEST(Weights, UniformMean) {
  Graph g = erdos_renyi(2500, 4.0, 1);
  ASSERT_GE(g.num_edges(), 10000u);
  Graph w = synthesize_weights(g, {7, 1, 100});
  double sd = 0, sc = 0;
  std::vector<std::size_t> hist(100, 0);
  for (const auto& e : w.edges()) {
    ASSERT_GE(e.attr.dist, 1u);
    ASSERT_LE(e.attr.dist, 100u);
    sd += e.attr.dist;
    sc += e.attr.cost;
    ++hist[e.attr.dist - 1];
  }
  const double m = static_cast<double>(w.num_edges());
  EXPECT_GE(sd / m, 47.0);
  EXPECT_LE(sd / m, 54.0);
  EXPECT_GE(sc / m, 47.0);
  EXPECT_LE(sc / m, 54.0);
  // Chi-square over 100 bins, 99 dof; 99.9th percentile is about 148.
  const double expect = m / 100;
  double chi = 0;
  for (auto h : hist) chi += (h - expect) * (h - expect) / expect;
  EXPECT_LT(chi, 148.0);
}

TEST(Weights, DegenerateRange) {
  Graph w = synthesize_weights(erdos_renyi(50, 3.0, 2), {1, 5, 5});
  for (const auto& e : w.edges()) EXPECT_EQ(e.attr, (EdgeAttr{5, 5}));
}

TEST(Weights, InvalidRange) {
  Graph g = erdos_renyi(10, 2.0, 2);
  EXPECT_THROW(synthesize_weights(g, {1, 0, 5}), Error);
  EXPECT_THROW(synthesize_weights(g, {1, 6, 5}), Error);
}

TEST(Weights, ReparseGivesSameWeights) {
  Graph g = parse_edge_list("3 1\n1 2\n2 3\n1 3\n");
  Graph h = parse_edge_list("1 3\n2 3\n1 2\n3 1\n");
  EXPECT_EQ(synthesize_weights(g, {5}), synthesize_weights(h, {5}));
}

TEST(PathMetrics, Sums) {
  Graph g = parse_edge_list("0 1 3 2\n1 2 3 2\n", {.has_weights = true});
  const std::vector<VertexId> one{0, 1}, two{0, 1, 2}, bad{0, 2};
  EXPECT_EQ(path_metrics(g, one), (PathMetrics{3, 2}));
  EXPECT_EQ(path_metrics(g, two), (PathMetrics{6, 4}));
  try {
    path_metrics(g, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("hop 0"), std::string::npos);
  }
}

TEST(PathMetrics, ExampleNetwork) {
  Graph g = fixtures::fig1();
  auto v = [&](const char* s) { return *g.find(s); };
  const std::vector<VertexId> aebc{v("a"), v("e"), v("b"), v("c")};
  const std::vector<VertexId> abc{v("a"), v("b"), v("c")};
  EXPECT_EQ(path_metrics(g, aebc), (PathMetrics{8, 3}));
  EXPECT_EQ(path_metrics(g, abc), (PathMetrics{6, 2}));
}

TEST(Cache, RoundTrip) {
  Graph g = synthesize_weights(erdos_renyi(120, 3.5, 4), {4});
  Bytes b = serialize_graph(g);
  EXPECT_EQ(b.size(), 12 + 16 * g.num_edges());
  EXPECT_EQ(deserialize_graph(b), g);
  b[0] = 'X';
  EXPECT_THROW(deserialize_graph(b), FormatError);
  Bytes t = serialize_graph(g);
  t.pop_back();
  EXPECT_THROW(deserialize_graph(t), FormatError);
}

TEST(Cache, TextRoundTrip) {
  Graph g = synthesize_weights(small_world(80, 3, 0.2, 5), {8});
  EXPECT_EQ(parse_edge_list(format_edge_list(g), {.has_weights = true}), g);
}

TEST(Generators, Deterministic) {
  EXPECT_EQ(erdos_renyi(100, 4, 1), erdos_renyi(100, 4, 1));
  EXPECT_EQ(small_world(100, 3, 0.1, 1), small_world(100, 3, 0.1, 1));
  Graph sw = small_world(100, 3, 0.0, 1);
  EXPECT_EQ(sw.num_edges(), 300u);
  Graph er = erdos_renyi(1000, 4, 2);
  EXPECT_NEAR(static_cast<double>(er.num_edges()) / 1000, 4.0, 0.3);
}
