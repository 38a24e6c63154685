// connor: command-line front end for building, encrypting and querying
// constrained shortest distance indexes.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "connor/bench.hpp"
#include "connor/keystore.hpp"
#include "connor/query_engine.hpp"
#include "connor/service.hpp"

using namespace connor;

namespace {

std::uint64_t seed_or_env(std::uint64_t seed) {
  if (const char* s = std::getenv("CONNOR_SEED"); s && *s) return std::stoull(s);
  return seed;
}

// Labels live next to the CNR1 cache, one per line, when they are not the
// plain vertex indices.
void save_graph(const Graph& g, const std::string& path) {
  write_file(path, serialize_graph(g));
  const std::string lpath = path + ".labels";
  if (g.has_identity_labels()) {
    std::filesystem::remove(lpath);
    return;
  }
  std::ofstream out(lpath);
  for (const auto& l : g.labels()) out << l << "\n";
}

Graph load_graph(const std::string& path) {
  Graph g = deserialize_graph(read_file(path));
  std::ifstream in(path + ".labels");
  if (!in) return g;
  std::vector<std::string> labels;
  for (std::string line; std::getline(in, line);) labels.push_back(line);
  if (labels.size() != g.num_vertices()) throw FormatError(path + ".labels does not match the vertex count");
  const auto edges = g.edges();
  return Graph(g.num_vertices(), edges, std::move(labels));
}

VertexId vertex(const Graph& g, const std::string& label) {
  auto v = g.find(label);
  if (!v) throw Error("unknown vertex '" + label + "'");
  return *v;
}

std::atomic<service::Server*> g_server{nullptr};

void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encrypted constrained shortest distance queries over 2-hop labeling indexes"};
  app.require_subcommand(1);

  // ingest
  std::string in_path, out_path;
  bool weighted = false, undirected = false;
  auto* ingest = app.add_subcommand("ingest", "Parse a text edge list into the binary graph cache");
  ingest->add_option("--in", in_path, "Edge list: `u v` or `u v dist cost` per line")->required();
  ingest->add_option("--out", out_path, "Output graph file")->required();
  ingest->add_flag("--weighted", weighted, "Lines carry distance and cost");
  ingest->add_flag("--undirected", undirected, "Add the reverse arc for every line");

  // weights
  std::string graph_path;
  std::uint64_t seed = 1;
  std::uint32_t lo = 1, hi = 100;
  auto* weights = app.add_subcommand("weights", "Assign seeded uniform distances and costs");
  weights->add_option("--graph", graph_path)->required();
  weights->add_option("--seed", seed);
  weights->add_option("--lo", lo);
  weights->add_option("--hi", hi);
  weights->add_option("--out", out_path)->required();

  // build-label
  std::string alpha_text = "3/2";
  std::size_t cap = 0;
  auto* build = app.add_subcommand("build-label", "Build the plaintext 2-hop cost labeling");
  build->add_option("--graph", graph_path)->required();
  build->add_option("--alpha", alpha_text, "Approximation ratio, e.g. 3/2");
  build->add_option("--cap", cap, "Per-sketch entry cap (0 = none)");
  build->add_option("--out", out_path)->required();

  // encrypt
  std::string label_path, keys_path, phi_text = "auto", zbits_text = "auto";
  auto* encrypt = app.add_subcommand("encrypt", "Encrypt a label index; writes the index and a client keystore");
  encrypt->add_option("--graph", graph_path)->required();
  encrypt->add_option("--index", label_path)->required();
  encrypt->add_option("--phi", phi_text, "Amplification factor, or auto");
  encrypt->add_option("--swhe-bits", zbits_text, "SWHE ciphertext width in bits, or auto");
  encrypt->add_option("--seed", seed, "Seed for phi when auto");
  encrypt->add_option("--keys", keys_path)->required();
  encrypt->add_option("--out", out_path)->required();

  // token
  std::string s_label, t_label;
  std::uint64_t theta = 0;
  int depth = kDefaultTreeDepth;
  auto* token = app.add_subcommand("token", "Issue a query token");
  token->add_option("--keys", keys_path)->required();
  token->add_option("--graph", graph_path, "Graph file, used to validate vertex labels");
  token->add_option("--s", s_label)->required();
  token->add_option("--t", t_label)->required();
  token->add_option("--theta", theta)->required();
  token->add_option("--depth", depth)->check(CLI::Range(1, kMaxTreeDepth));
  token->add_option("--out", out_path)->required();

  // query
  std::string index_path, addr, token_path;
  bool hide_ysize = false;
  auto* query = app.add_subcommand("query", "Run a token against an index file or a server");
  auto* q_index = query->add_option("--index", index_path);
  auto* q_addr = query->add_option("--addr", addr, "HOST:PORT");
  q_index->excludes(q_addr);
  query->add_option("--token", token_path)->required();
  query->add_option("--keys", keys_path, "Decrypt and print the distance");
  query->add_option("--out", out_path, "Write the raw result bytes");
  query->add_flag("--hide-ysize", hide_ysize, "Do not report |Y|");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Exact and plain-index answers for one query");
  oracle->add_option("--graph", graph_path)->required();
  oracle->add_option("--index", label_path, "Label index for the plain answer");
  oracle->add_option("--s", s_label)->required();
  oracle->add_option("--t", t_label)->required();
  oracle->add_option("--theta", theta)->required();

  // serve
  std::string host = "127.0.0.1";
  std::uint16_t port = 7070;
  auto* serve = app.add_subcommand("serve", "Serve an encrypted index over TCP");
  serve->add_option("--index", index_path)->required();
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_flag("--hide-ysize", hide_ysize, "Do not report |Y|");

  // bench
  std::string config_path, format = "csv";
  auto* bench_cmd = app.add_subcommand("bench", "Run the evaluation suite");
  bench_cmd->add_option("--config", config_path, "JSON config")->required();
  bench_cmd->add_option("--out", out_path, "Report file (stdout if omitted)");
  bench_cmd->add_option("--format", format)->check(CLI::IsMember({"text", "csv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      std::ifstream in(in_path);
      if (!in) throw Error("cannot open " + in_path);
      Graph g = parse_edge_list(in, {weighted, undirected});
      save_graph(g, out_path);
      std::cout << "vertices " << g.num_vertices() << ", edges " << g.num_edges() << "\n";
    } else if (*weights) {
      Graph g = synthesize_weights(load_graph(graph_path), {seed_or_env(seed), lo, hi});
      save_graph(g, out_path);
    } else if (*build) {
      Graph g = load_graph(graph_path);
      LabelIndex idx = build_index(g, Rational::parse(alpha_text), {cap, false});
      write_file(out_path, serialize_label_index(idx));
      std::cout << "entries out " << idx.out_entries() << ", in " << idx.in_entries() << ", B " << idx.max_dist_B
                << "\n";
    } else if (*encrypt) {
      Graph g = load_graph(graph_path);
      LabelIndex idx = deserialize_label_index(read_file(label_path));
      if (idx.num_vertices() != g.num_vertices()) throw Error("index and graph differ in vertex count");
      std::mt19937_64 rng(seed_or_env(seed));
      const std::uint64_t phi = phi_text == "auto" ? choose_phi(rng) : std::stoull(phi_text);
      const std::size_t z = zbits_text == "auto" ? 0 : std::stoul(zbits_text);
      SetupParams params = make_params(idx, phi, z);
      crypto::TransparentSwhe backend(params.z_bits);
      Keystore ks{keygen(backend), phi, params.B, params.N, static_cast<std::uint32_t>(params.z_bits)};
      EncryptedIndex enc = setup(ks.keys, backend, params, idx, g.labels());
      write_file(out_path, serialize_index(enc));
      write_file(keys_path, serialize_keystore(ks));
      std::filesystem::permissions(keys_path, std::filesystem::perms::owner_read | std::filesystem::perms::owner_write);
      const auto leak = leakage_profile(idx, enc);
      std::cout << "n " << leak.n << ", B " << leak.B << ", omega_out " << leak.omega_out << ", omega_in "
                << leak.omega_in << ", z " << params.z_bits << "\n";
    } else if (*token) {
      const Keystore ks = deserialize_keystore(read_file(keys_path));
      if (!graph_path.empty()) {
        Graph g = load_graph(graph_path);
        vertex(g, s_label);
        vertex(g, t_label);
      }
      write_file(out_path, serialize_token(gen_token(ks.keys.K, ks.phi, s_label, t_label, theta, depth)));
    } else if (*query) {
      const Bytes tok = read_file(token_path);
      Bytes result;
      if (!addr.empty()) {
        const auto colon = addr.rfind(':');
        if (colon == std::string::npos) throw Error("--addr must be HOST:PORT");
        result = service::query_remote(addr.substr(0, colon),
                                       static_cast<std::uint16_t>(std::stoul(addr.substr(colon + 1))), tok);
      } else if (!index_path.empty()) {
        const EncryptedIndex enc = deserialize_index(read_file(index_path));
        crypto::TransparentSwhe backend(enc.z_bits);
        result = service::handle_query(enc, backend, tok, hide_ysize);
      } else {
        throw Error("query needs --index or --addr");
      }
      if (!out_path.empty()) write_file(out_path, result);
      if (!keys_path.empty()) {
        const Keystore ks = deserialize_keystore(read_file(keys_path));
        crypto::TransparentSwhe backend(ks.z_bits);
        const EncryptedResult res = deserialize_result(result, ks.z_bits);
        const auto r = recover_distance(backend, ks.keys.swhe.sk, res, ks.N);
        if (r)
          std::cout << "distance " << *r << " (|Y| " << res.y_size << ")\n";
        else
          std::cout << "infeasible\n";
      }
    } else if (*oracle) {
      Graph g = load_graph(graph_path);
      const CsdQuery q{vertex(g, s_label), vertex(g, t_label), theta};
      const auto exact = exact_csd(g, q);
      std::cout << "exact " << (exact ? std::to_string(*exact) : "infeasible") << "\n";
      if (auto b = cost_bounds(g, q.s, q.t)) std::cout << "cost range " << b->c_min << " " << b->c_max << "\n";
      if (!label_path.empty()) {
        const auto plain = plain_query(deserialize_label_index(read_file(label_path)), q);
        std::cout << "plain " << (plain ? std::to_string(plain->dist()) : "infeasible");
        if (plain) std::cout << " via " << g.label(plain->hub) << " cost " << plain->cost();
        std::cout << "\n";
      }
    } else if (*serve) {
      const EncryptedIndex enc = deserialize_index(read_file(index_path));
      crypto::TransparentSwhe backend(enc.z_bits);
      service::Server server(enc, backend, {host, port, hide_ysize});
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving " << enc.out.size() + enc.in.size() << " records on " << host << ":" << server.port()
                << "\n";
      server.run();
      g_server = nullptr;
    } else if (*bench_cmd) {
      bench::BenchConfig cfg = bench::load_config(config_path);
      bench::apply_seed_env(cfg);
      const auto metrics = bench::run_bench(cfg, &std::cerr);
      const std::string text = bench::report(metrics, bench::parse_format(format));
      if (out_path.empty())
        std::cout << text;
      else
        write_file(out_path, as_bytes(text));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
