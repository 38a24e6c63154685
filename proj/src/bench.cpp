#include "connor/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>

namespace connor::bench {

using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

// Keeps timed results observable so the calls are not optimized away.
volatile std::size_t benchmark_sink = 0;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void reject_unknown(const json& j, const std::set<std::string>& known, const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw Error(std::string("unknown key '") + it.key() + "' in " + where);
}

DatasetSpec parse_dataset(const json& j) {
  reject_unknown(j, {"name", "kind", "n", "degree", "rewire", "path", "weighted", "undirected", "seed", "weights"},
                 "dataset");
  DatasetSpec d;
  d.kind = j.value("kind", d.kind);
  d.n = j.value("n", d.n);
  d.degree = j.value("degree", d.degree);
  d.rewire = j.value("rewire", d.rewire);
  d.path = j.value("path", d.path);
  d.weighted = j.value("weighted", d.weighted);
  d.undirected = j.value("undirected", d.undirected);
  d.seed = j.value("seed", d.seed);
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    if (!w.is_array() || w.size() != 2) throw Error("dataset weights must be [lo, hi]");
    d.w_lo = w[0].get<std::uint32_t>();
    d.w_hi = w[1].get<std::uint32_t>();
  }
  if (d.kind != "er" && d.kind != "small-world" && d.kind != "file")
    throw Error("dataset kind must be er, small-world or file");
  if (d.kind == "file" && d.path.empty()) throw Error("file dataset needs a path");
  d.name = j.value("name", d.kind == "file" ? d.path : d.kind + "-" + std::to_string(d.n));
  return d;
}

}  // namespace

BenchConfig parse_config(const json& j) {
  reject_unknown(j,
                 {"query_count", "thetas_per_pair", "alpha", "depths", "seed", "timing_reps", "timing_queries",
                  "token_reps", "z_bits", "datasets"},
                 "bench config");
  BenchConfig cfg;
  cfg.query_count = j.value("query_count", cfg.query_count);
  cfg.thetas_per_pair = j.value("thetas_per_pair", cfg.thetas_per_pair);
  if (j.contains("alpha")) {
    const auto& a = j.at("alpha");
    cfg.alpha = Rational::parse(a.is_string() ? a.get<std::string>() : a.dump());
  }
  cfg.depths = j.value("depths", cfg.depths);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.timing_reps = j.value("timing_reps", cfg.timing_reps);
  cfg.timing_queries = j.value("timing_queries", cfg.timing_queries);
  cfg.token_reps = j.value("token_reps", cfg.token_reps);
  cfg.z_bits = j.value("z_bits", cfg.z_bits);
  if (j.contains("datasets"))
    for (const auto& d : j.at("datasets")) cfg.datasets.push_back(parse_dataset(d));
  if (cfg.query_count < 1 || cfg.thetas_per_pair < 1) throw Error("query_count and thetas_per_pair must be >= 1");
  if (cfg.depths.empty()) throw Error("depths must not be empty");
  for (int d : cfg.depths)
    if (d < 1 || d > kMaxTreeDepth) throw Error("depths must lie in [1, 8]");
  if (cfg.timing_reps < 1 || cfg.token_reps < 1) throw Error("repetition counts must be >= 1");
  return cfg;
}

BenchConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(0, path + ": " + e.what());
  }
  return parse_config(j);
}

void apply_seed_env(BenchConfig& cfg) {
  if (const char* s = std::getenv("CONNOR_SEED"); s && *s) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (*end) throw Error("CONNOR_SEED must be an unsigned integer");
    cfg.seed = v;
    for (auto& d : cfg.datasets) d.seed = v + (d.seed - 1);
  }
}

Graph make_graph(const DatasetSpec& spec) {
  Graph g;
  if (spec.kind == "file") {
    std::ifstream in(spec.path);
    if (!in) throw Error("cannot open " + spec.path);
    g = parse_edge_list(in, {spec.weighted, spec.undirected});
    if (spec.weighted) return g;
  } else if (spec.kind == "small-world") {
    g = small_world(spec.n, static_cast<std::size_t>(std::lround(spec.degree)), spec.rewire, spec.seed);
  } else {
    g = erdos_renyi(spec.n, spec.degree, spec.seed);
  }
  return synthesize_weights(g, {spec.seed, spec.w_lo, spec.w_hi});
}

std::vector<CsdQuery> gen_query_set(const Graph& g, const BenchConfig& cfg) {
  std::vector<CsdQuery> out;
  const std::size_t n = g.num_vertices();
  if (n < 2) throw Error("graph too small for queries");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(n - 1));
  std::size_t pairs = 0, draws = 0;
  while (pairs < cfg.query_count) {
    if (++draws > 100 * cfg.query_count)
      throw Error("graph too sparse: found " + std::to_string(pairs) + " reachable pairs in " +
                  std::to_string(draws - 1) + " draws");
    const VertexId s = pick(rng), t = pick(rng);
    if (s == t) continue;
    const auto bounds = cost_bounds(g, s, t);
    if (!bounds) continue;
    std::uniform_int_distribution<std::uint64_t> theta(bounds->c_min, bounds->c_max);
    for (std::size_t i = 0; i < cfg.thetas_per_pair; ++i) out.push_back({s, t, theta(rng)});
    ++pairs;
  }
  return out;
}

Dataset::Dataset(std::string name_, Graph g_, const Rational& alpha, std::uint64_t seed, std::size_t z_bits)
    : name(std::move(name_)), g(std::move(g_)) {
  auto t0 = Clock::now();
  idx = build_index(g, alpha);
  label_build_s = seconds_since(t0);
  std::mt19937_64 rng(seed);
  params = make_params(idx, choose_phi(rng), z_bits);
  backend = crypto::TransparentSwhe(params.z_bits);
  keys = keygen(backend);
  t0 = Clock::now();
  enc = setup(keys, backend, params, idx, g.labels());
  encrypt_s = seconds_since(t0);
  index_bytes = 38 + (enc.out.size() + enc.in.size()) * (16 + enc.record_bytes());
  decoder = std::make_unique<EntryDecoder>(keys, backend, params.phi, params.N, g.labels());
}

QueryOutcome evaluate_query(const Dataset& ds, const CsdQuery& q, int depth) {
  const QueryToken tok = gen_token(ds.keys.K, ds.params.phi, ds.g.label(q.s), ds.g.label(q.t), q.theta, depth);
  QueryTrace trace;
  const EncryptedResult res = server_query(ds.enc, ds.backend, tok, &trace);
  QueryOutcome out;
  out.y_size = res.y_size;
  for (const auto& p : trace.pairs) {
    if (p.verdict == CompareOutcome::kGreater) continue;
    if (p.verdict == CompareOutcome::kUncertain) ++out.uncertain;
    HubPair hp;
    hp.out_entry = ds.decoder->decode(trace.ls[p.s_index]);
    hp.in_entry = ds.decoder->decode(trace.lt[p.t_index]);
    hp.hub = hp.out_entry.hub;
    (hp.cost() <= q.theta ? out.true_pos : out.false_pos)++;
    out.admitted.push_back(hp);
  }
  out.r_e = recover_distance(ds.backend, ds.keys.swhe.sk, res, ds.params.N);
  if (auto plain = plain_query(ds.idx, q)) out.r_p = plain->dist();
  return out;
}

std::optional<double> precision_of(const std::vector<QueryOutcome>& outcomes) {
  double sum = 0;
  std::size_t count = 0;
  for (const auto& o : outcomes) {
    const std::size_t y = o.true_pos + o.false_pos;
    if (y == 0) continue;
    sum += static_cast<double>(o.true_pos) / static_cast<double>(y);
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

Deviation deviation_of(const std::vector<QueryOutcome>& outcomes) {
  Deviation d;
  for (const auto& o : outcomes) {
    if (!o.r_e || !o.r_p || *o.r_p == 0) {
      ++d.excluded;
      continue;
    }
    d.xi.push_back(static_cast<double>(*o.r_e) / static_cast<double>(*o.r_p));
  }
  std::sort(d.xi.begin(), d.xi.end());
  return d;
}

namespace {

std::vector<QueryOutcome> evaluate_all(const Dataset& ds, const std::vector<CsdQuery>& qs, int depth) {
  std::vector<QueryOutcome> out;
  out.reserve(qs.size());
  for (const auto& q : qs) {
    out.push_back(evaluate_query(ds, q, depth));
    out.back().admitted.clear();
    out.back().admitted.shrink_to_fit();
  }
  return out;
}

Timing summarize(const std::vector<double>& xs) {
  Timing t;
  if (xs.empty()) return t;
  for (double x : xs) t.mean_ms += x;
  t.mean_ms /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double var = 0;
    for (double x : xs) var += (x - t.mean_ms) * (x - t.mean_ms);
    t.sd_ms = std::sqrt(var / static_cast<double>(xs.size() - 1));
  }
  return t;
}

std::vector<CsdQuery> timing_subset(const std::vector<CsdQuery>& qs, std::size_t cap) {
  if (cap == 0 || qs.size() <= cap) return qs;
  std::vector<CsdQuery> out;
  out.reserve(cap);
  for (std::size_t i = 0; i < cap; ++i) out.push_back(qs[i * qs.size() / cap]);
  return out;
}

}  // namespace

std::optional<double> bench_precision(const Dataset& ds, const std::vector<CsdQuery>& qs, int depth) {
  return precision_of(evaluate_all(ds, qs, depth));
}

Deviation bench_deviation(const Dataset& ds, const std::vector<CsdQuery>& qs, int depth) {
  return deviation_of(evaluate_all(ds, qs, depth));
}

QueryTimings time_queries(const Dataset& ds, const std::vector<CsdQuery>& qs, const std::vector<int>& depths,
                          std::size_t reps) {
  // Tokens are prepared up front: only server work is timed.
  std::vector<std::vector<QueryToken>> tokens(qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i)
    for (int d : depths)
      tokens[i].push_back(gen_token(ds.keys.K, ds.params.phi, ds.g.label(qs[i].s), ds.g.label(qs[i].t),
                                    qs[i].theta, d));

  std::vector<std::vector<double>> enc_means(depths.size());
  std::vector<double> plain_means;
  std::size_t sink = 0;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    std::vector<double> total(depths.size(), 0.0);
    double plain_total = 0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
      for (std::size_t k = 0; k < depths.size(); ++k) {
        const std::size_t di = (k + i + rep) % depths.size();
        const auto t0 = Clock::now();
        sink += server_query(ds.enc, ds.backend, tokens[i][di]).y_size;
        total[di] += seconds_since(t0) * 1e3;
      }
      const auto t0 = Clock::now();
      auto p = plain_query(ds.idx, qs[i]);
      plain_total += seconds_since(t0) * 1e3;
      sink += p ? 1 : 0;
    }
    for (std::size_t k = 0; k < depths.size(); ++k) enc_means[k].push_back(total[k] / static_cast<double>(qs.size()));
    plain_means.push_back(plain_total / static_cast<double>(qs.size()));
  }
  QueryTimings out;
  for (const auto& m : enc_means) out.encrypted.push_back(summarize(m));
  out.plain = summarize(plain_means);
  benchmark_sink = sink;
  return out;
}

std::vector<Timing> time_tokens(const Dataset& ds, const std::vector<CsdQuery>& qs, const std::vector<int>& depths,
                                std::size_t reps) {
  std::vector<Timing> out;
  if (qs.empty()) return std::vector<Timing>(depths.size());
  std::vector<std::vector<double>> samples(depths.size());
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const CsdQuery& q = qs[rep % qs.size()];
    for (std::size_t k = 0; k < depths.size(); ++k) {
      const auto t0 = Clock::now();
      auto tok = gen_token(ds.keys.K, ds.params.phi, ds.g.label(q.s), ds.g.label(q.t), q.theta, depths[k]);
      samples[k].push_back(seconds_since(t0) * 1e3);
      if (tok.tree.nodes.empty()) throw Error("empty tree");
    }
  }
  for (const auto& s : samples) out.push_back(summarize(s));
  return out;
}

Metrics run_dataset(const Dataset& ds, const BenchConfig& cfg) {
  const auto qs = gen_query_set(ds.g, cfg);
  Metrics m;
  m.dataset = ds.name;
  m.n = ds.g.num_vertices();
  m.m = ds.g.num_edges();
  m.alpha = ds.idx.alpha;
  m.index_build_s = ds.label_build_s + ds.encrypt_s;
  m.index_bytes = ds.index_bytes;
  m.omega_out = ds.enc.out.size();
  m.omega_in = ds.enc.in.size();
  m.B = ds.idx.max_dist_B;
  m.queries = qs.size();

  const auto timed = timing_subset(qs, cfg.timing_queries);
  const QueryTimings qt = time_queries(ds, timed, cfg.depths, cfg.timing_reps);
  const auto tt = time_tokens(ds, qs, cfg.depths, cfg.token_reps);
  for (std::size_t k = 0; k < cfg.depths.size(); ++k) {
    DepthMetrics dm;
    dm.depth = cfg.depths[k];
    dm.token_bytes = token_bytes(dm.depth);
    dm.token = tt[k];
    dm.query = qt.encrypted[k];
    dm.plain = qt.plain;
    const auto outcomes = evaluate_all(ds, qs, dm.depth);
    dm.precision_mean = precision_of(outcomes);
    dm.precision_queries = static_cast<std::size_t>(std::count_if(
        outcomes.begin(), outcomes.end(), [](const QueryOutcome& o) { return o.true_pos + o.false_pos > 0; }));
    dm.deviation = deviation_of(outcomes);
    m.depths.push_back(std::move(dm));
  }
  return m;
}

std::vector<Metrics> run_bench(const BenchConfig& cfg, std::ostream* log) {
  std::vector<Metrics> out;
  for (const auto& spec : cfg.datasets) {
    if (log) *log << "dataset " << spec.name << ": building\n";
    Dataset ds(spec.name, make_graph(spec), cfg.alpha, cfg.seed ^ spec.seed, cfg.z_bits);
    if (log)
      *log << "  n=" << ds.g.num_vertices() << " m=" << ds.g.num_edges() << " entries=" << ds.enc.out.size() << "+"
           << ds.enc.in.size() << " z=" << ds.params.z_bits << " build " << ds.label_build_s + ds.encrypt_s << " s\n";
    out.push_back(run_dataset(ds, cfg));
  }
  return out;
}

}  // namespace connor::bench
