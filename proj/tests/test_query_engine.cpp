#include <gtest/gtest.h>

#include <bit>
#include <random>

#include "connor/query_engine.hpp"
#include "support.hpp"

using namespace connor;
using namespace connor::crypto;

namespace {

struct Deployment {
  Graph g;
  LabelIndex idx;
  SetupParams params;
  TransparentSwhe backend;
  ClientKeys keys;
  EncryptedIndex enc;

  Deployment(Graph graph, LabelIndex index, std::uint64_t phi = std::uint64_t{1} << 20)
      : g(std::move(graph)),
        idx(std::move(index)),
        params(make_params(idx, phi)),
        backend(params.z_bits),
        keys(keygen(backend)),
        enc(setup(keys, backend, params, idx, g.labels())) {}
  explicit Deployment(Graph graph) : Deployment(graph, build_index(graph, {3, 2})) {}

  QueryToken token(VertexId s, VertexId t, std::uint64_t theta, int depth = 6) const {
    return gen_token(keys.K, params.phi, g.label(s), g.label(t), theta, depth);
  }
  std::optional<std::int64_t> answer(VertexId s, VertexId t, std::uint64_t theta, int depth = 6) const {
    return recover_distance(backend, keys.swhe.sk, server_query(enc, backend, token(s, t, theta, depth)), params.N);
  }
};

mpz_class pow2(unsigned e) { return mpz_class(1) << e; }

}  // namespace

TEST(Token, SizesAcrossDepths) {
  const PrfKey K = PrfKey::random();
  for (int d = 1; d <= kMaxTreeDepth; ++d) {
    const Bytes b = serialize_token(gen_token(K, 1 << 20, "s", "t", 50, d));
    EXPECT_EQ(b.size(), token_bytes(d));
    EXPECT_EQ(b.size(), 16 * ((std::size_t{1} << d) + 3) + 1);
  }
}

TEST(Token, DeterministicAndRoundTrips) {
  const PrfKey K = PrfKey::random();
  const QueryToken a = gen_token(K, 1 << 21, "x", "y", 77, 6);
  EXPECT_EQ(serialize_token(a), serialize_token(gen_token(K, 1 << 21, "x", "y", 77, 6)));
  EXPECT_NE(serialize_token(a), serialize_token(gen_token(K, 1 << 21, "x", "y", 78, 6)));
  EXPECT_EQ(deserialize_token(serialize_token(a)), a);
  EXPECT_EQ(a.s_out, vertex_prf(K, "x", VertexTag::kOutMask));
  EXPECT_EQ(a.t_out, vertex_prf(K, "x", VertexTag::kOutKey));
  EXPECT_EQ(a.s_in, vertex_prf(K, "y", VertexTag::kInMask));
  EXPECT_EQ(a.t_in, vertex_prf(K, "y", VertexTag::kInKey));
  // The tree encrypts fractions of phi * theta under the derived ORE key.
  EXPECT_EQ(ore_key_from(K).decrypt(a.tree.nodes[0]), (std::uint64_t{77} << 21) / 2);
}

TEST(Token, Preconditions) {
  const PrfKey K = PrfKey::random();
  EXPECT_THROW(gen_token(K, 63, "s", "t", 5, 6), Error);
  EXPECT_NO_THROW(gen_token(K, 64, "s", "t", 5, 6));
  EXPECT_THROW(gen_token(K, 1 << 20, "s", "t", std::uint64_t{1} << 44, 6), OverflowError);
  EXPECT_THROW(gen_token(K, 1 << 20, "s", "t", 5, 0), Error);
  EXPECT_THROW(gen_token(K, 1 << 20, "s", "t", 5, 9), Error);
  const Bytes b = serialize_token(gen_token(K, 1 << 20, "s", "t", 5, 3));
  EXPECT_THROW(deserialize_token(Bytes(b.begin(), b.end() - 1)), FormatError);
  Bytes extra = b;
  extra.push_back(1);
  EXPECT_THROW(deserialize_token(extra), FormatError);
}

TEST(Unroll, CountsOrderAndUnknownVertices) {
  Deployment d(synthesize_weights(erdos_renyi(80, 3, 4), {4}));
  for (VertexId u = 0; u < d.g.num_vertices(); ++u) {
    const auto T = vertex_prf(d.keys.K, d.g.label(u), VertexTag::kOutKey);
    const auto S = vertex_prf(d.keys.K, d.g.label(u), VertexTag::kOutMask);
    const auto list = unroll_sketch(d.enc, Side::kOut, T, S);
    ASSERT_EQ(list.size(), d.idx.out[u].size());
    for (std::size_t w = 0; w < list.size(); ++w)
      ASSERT_EQ(list[w].V, vertex_prf(d.keys.K, d.g.label(d.idx.out[u][w].hub), VertexTag::kId));
    const auto Ti = vertex_prf(d.keys.K, d.g.label(u), VertexTag::kInKey);
    const auto Si = vertex_prf(d.keys.K, d.g.label(u), VertexTag::kInMask);
    ASSERT_EQ(unroll_sketch(d.enc, Side::kIn, Ti, Si).size(), d.idx.in[u].size());
  }
  const auto nobody = vertex_prf(d.keys.K, "no such vertex", VertexTag::kOutKey);
  EXPECT_TRUE(unroll_sketch(d.enc, Side::kOut, nobody, nobody).empty());
}

TEST(Unroll, ThreeEntries) {
  // out(0) = {(0,0,0), (1,..), (2,..)} once 0 sits after both hubs in the order.
  LabelIndex idx;
  idx.alpha = {3, 2};
  idx.out = {{{0, 0, 0}, {1, 2, 2}, {2, 3, 1}}, {{1, 0, 0}}, {{2, 0, 0}}};
  idx.in = {{{0, 0, 0}}, {{1, 0, 0}}, {{2, 0, 0}}};
  idx.max_dist_B = 3;
  const std::vector<Edge> e{{0, 1, {2, 2}}, {0, 2, {3, 1}}};
  Deployment d(Graph(3, e), idx);
  const auto list = unroll_sketch(d.enc, Side::kOut, vertex_prf(d.keys.K, "0", VertexTag::kOutKey),
                                  vertex_prf(d.keys.K, "0", VertexTag::kOutMask));
  EXPECT_EQ(list.size(), 3u);
  EXPECT_FALSE(d.enc.out.find(entry_key(vertex_prf(d.keys.K, "0", VertexTag::kOutKey), 3)));
}

TEST(ServerQuery, ExampleNetwork) {
  // Expected answer rebuilt from the plaintext entries behind every admitted
  // pair; the feasible pairs must all be admitted and the sandwich must hold.
  Deployment d(fixtures::fig1());
  const VertexId a = *d.g.find("a"), c = *d.g.find("c");
  for (const auto& [theta, best] : std::vector<std::pair<std::uint64_t, std::int64_t>>{{4, 6}, {100, 5}, {1, -1}}) {
    QueryTrace trace;
    const auto res = server_query(d.enc, d.backend, d.token(a, c, theta), &trace);
    mpz_class m = 0;
    std::size_t feasible_admitted = 0, y = 0;
    for (const auto& p : trace.pairs) {
      const auto& eo = d.idx.out[a][p.s_index];
      const auto& ei = d.idx.in[c][p.t_index];
      ASSERT_EQ(eo.hub, ei.hub);
      const bool fits = std::uint64_t{eo.cost} + ei.cost <= theta;
      if (fits) ASSERT_NE(p.verdict, CompareOutcome::kGreater);
      if (p.verdict == CompareOutcome::kGreater) continue;
      ++y;
      feasible_admitted += fits;
      m += pow2(2 * d.params.N - eo.dist - ei.dist);
    }
    EXPECT_EQ(res.y_size, y);
    const auto got = recover_distance(d.backend, d.keys.swhe.sk, res, d.params.N);
    EXPECT_EQ(got, recover_from_message(m, d.params.N));
    if (best < 0) {
      EXPECT_EQ(feasible_admitted, 0u);
    } else {
      ASSERT_TRUE(got);
      EXPECT_LE(*got, best);
      EXPECT_GE(*got, best - static_cast<std::int64_t>(std::bit_width(y) - 1));
    }
  }
}

TEST(ServerQuery, ConstructedHubSums) {
  // Two hubs with pair sums 5 and 7, all pairs cheap; B = 5 gives N = 11.
  LabelIndex idx;
  idx.alpha = {3, 2};
  idx.out = {{{2, 2, 1}, {3, 3, 1}}, {}, {}, {}};
  idx.in = {{}, {{2, 3, 1}, {3, 4, 1}}, {}, {}};
  idx.max_dist_B = 5;
  Deployment d(Graph(4, std::vector<Edge>{}), idx);
  ASSERT_EQ(d.params.N, 11u);
  QueryTrace trace;
  const EncryptedResult res = server_query(d.enc, d.backend, d.token(0, 1, 100), &trace);
  ASSERT_FALSE(res.empty);
  EXPECT_EQ(res.y_size, 2u);
  for (const auto& p : trace.pairs) EXPECT_EQ(p.verdict, CompareOutcome::kLessEq);
  const mpz_class m = d.backend.decrypt(d.keys.swhe.sk, res.d);
  EXPECT_EQ(m, pow2(17) + pow2(15));
  EXPECT_EQ(recover_from_message(m, 11), 5);
  EXPECT_EQ(recover_distance(d.backend, d.keys.swhe.sk, res, 11), 5);
  // Without a common hub the result is empty.
  EXPECT_TRUE(server_query(d.enc, d.backend, d.token(1, 0, 100)).empty);
  EXPECT_FALSE(recover_distance(d.backend, d.keys.swhe.sk, server_query(d.enc, d.backend, d.token(1, 0, 100)), 11));
}

TEST(ServerQuery, AllCrossPairsOfOneHubAreFiltered) {
  LabelIndex idx;
  idx.alpha = {3, 2};
  idx.out = {{{2, 1, 9}, {2, 4, 1}}, {}, {}};
  idx.in = {{}, {{2, 1, 9}, {2, 3, 2}}, {}};
  idx.max_dist_B = 4;
  Deployment d(Graph(3, std::vector<Edge>{}), idx);
  QueryTrace trace;
  server_query(d.enc, d.backend, d.token(0, 1, 100), &trace);
  EXPECT_EQ(trace.pairs.size(), 4u);
  // theta = 3 admits only (4,1)+(3,2) by cost; its distance is 7.
  EXPECT_EQ(d.answer(0, 1, 3, 8), 7);
  EXPECT_EQ(d.answer(0, 1, 100, 8), 2);
}

TEST(Recover, Formula) {
  const std::uint32_t N = 11;
  EXPECT_EQ(recover_from_message(pow2(22 - 5), N), 5);
  EXPECT_EQ(recover_from_message(pow2(22), N), 0);
  EXPECT_FALSE(recover_from_message(0, N));
  EXPECT_EQ(recover_from_message(pow2(22 + 20), N), -20);
  EXPECT_THROW(recover_from_message(pow2(22 + 21), N), CryptoError);
  // |Y| equal terms at d* sit in [d* - floor(log2 |Y|), d*].
  for (unsigned y = 1; y <= 64; ++y) {
    const auto r = recover_from_message(pow2(22 - 9) * y, N);
    ASSERT_TRUE(r);
    EXPECT_LE(*r, 9);
    EXPECT_GE(*r, 9 - static_cast<int>(std::bit_width(y) - 1));
  }
}

TEST(Recover, RandomSandwich) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::uint32_t N = 1 + rng() % 200;
    const std::size_t k = 1 + rng() % 64;
    mpz_class m = 0;
    std::uint64_t dmin = ~0ull;
    for (std::size_t i = 0; i < k; ++i) {
      const std::uint64_t d = rng() % (2 * N + 1);
      dmin = std::min(dmin, d);
      m += pow2(static_cast<unsigned>(2 * N - d));
    }
    const auto r = recover_from_message(m, N);
    ASSERT_TRUE(r);
    ASSERT_LE(*r, static_cast<std::int64_t>(dmin));
    ASSERT_GE(*r, static_cast<std::int64_t>(dmin) - static_cast<std::int64_t>(std::bit_width(k) - 1));
    if (k == 1) ASSERT_EQ(*r, static_cast<std::int64_t>(dmin));
  }
}

TEST(Result, WireFormat) {
  TransparentSwhe be;
  const auto kp = be.keygen(128);
  EncryptedResult r{false, 5, be.mul(be.encrypt(kp.pk, 2), be.encrypt(kp.pk, 3))};
  const Bytes b = serialize_result(r);
  EXPECT_EQ(b.size(), 1 + 4 + 256u);
  EXPECT_EQ(b[0], 0);
  EXPECT_EQ(b[4], 5);
  EXPECT_EQ(deserialize_result(b, 2048), r);
  const Bytes hidden = serialize_result(r, true);
  EXPECT_EQ(deserialize_result(hidden, 2048).y_size, 0u);
  const Bytes empty = serialize_result(EncryptedResult{});
  EXPECT_EQ(empty, (Bytes{1, 0, 0, 0, 0}));
  EXPECT_TRUE(deserialize_result(empty, 2048).empty);
  Bytes flags = b;
  flags[0] = 4;
  EXPECT_THROW(deserialize_result(flags, 2048), FormatError);
  EXPECT_THROW(deserialize_result(b, 4096), FormatError);
}

TEST(EndToEnd, PlainAndEncryptedAgree) {
  Deployment d(synthesize_weights(small_world(150, 3, 0.15, 3), {3}));
  EntryDecoder dec(d.keys, d.backend, d.params.phi, d.params.N, d.g.labels());
  std::mt19937_64 rng(3);
  std::size_t checked = 0;
  while (checked < 150) {
    const VertexId s = rng() % 150, t = rng() % 150;
    const auto b = cost_bounds(d.g, s, t);
    if (s == t || !b) continue;
    const std::uint64_t theta = b->c_min + rng() % (b->c_max - b->c_min + 1);
    ++checked;
    QueryTrace trace;
    const auto tok = d.token(s, t, theta);
    const auto res = server_query(d.enc, d.backend, tok, &trace);
    EXPECT_EQ(serialize_result(res), serialize_result(server_query(d.enc, d.backend, tok)));
    std::optional<std::uint64_t> best_feasible;
    bool uncertain = false;
    for (const auto& p : trace.pairs) {
      const SketchEntry x = dec.decode(trace.ls[p.s_index]), y = dec.decode(trace.lt[p.t_index]);
      ASSERT_EQ(x.hub, y.hub);
      const std::uint64_t cost = std::uint64_t{x.cost} + y.cost, dist = std::uint64_t{x.dist} + y.dist;
      if (p.verdict == CompareOutcome::kLessEq) ASSERT_LE(cost, theta);
      if (p.verdict == CompareOutcome::kGreater) ASSERT_GT(cost, theta);
      uncertain |= p.verdict == CompareOutcome::kUncertain;
      if (p.verdict != CompareOutcome::kGreater && cost <= theta && (!best_feasible || dist < *best_feasible))
        best_feasible = dist;
    }
    EXPECT_EQ(res.y_size, trace.admitted());
    const auto plain = plain_query(d.idx, {s, t, theta});
    ASSERT_EQ(best_feasible.has_value(), plain.has_value());
    if (plain) EXPECT_EQ(*best_feasible, plain->dist());
    const auto r = recover_distance(d.backend, d.keys.swhe.sk, res, d.params.N);
    if (plain) {
      ASSERT_TRUE(r);
      EXPECT_LE(*r, static_cast<std::int64_t>(plain->dist()));
      if (!uncertain && res.y_size == 1) EXPECT_EQ(*r, static_cast<std::int64_t>(plain->dist()));
    }
  }
}

TEST(EndToEnd, WidthMismatchRejected) {
  Deployment d(fixtures::fig1());
  TransparentSwhe other(d.params.z_bits + 256);
  EXPECT_THROW(server_query(d.enc, other, d.token(0, 2, 4)), Error);
}
