#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "connor/labeling.hpp"
#include "connor/query_engine.hpp"
#include "connor/secure_index.hpp"
#include "connor/swhe.hpp"

namespace connor::bench {

/// A synthetic or file-backed graph to evaluate on.
struct DatasetSpec {
  std::string name;
  std::string kind = "er";  // "er", "small-world" or "file"
  std::size_t n = 100;
  double degree = 4.0;      // er: average out-degree; small-world: k = round(degree)
  double rewire = 0.1;      // small-world only
  std::string path;         // file only; weighted `u v d c` unless `weighted` is false
  bool weighted = true;
  bool undirected = false;
  std::uint64_t seed = 1;
  std::uint32_t w_lo = 1;
  std::uint32_t w_hi = 100;
};

struct BenchConfig {
  std::size_t query_count = 200;     // (s, t) pairs
  std::size_t thetas_per_pair = 50;  // theta samples per pair
  Rational alpha{3, 2};
  std::vector<int> depths{1, 2, 3, 4, 5, 6};
  std::uint64_t seed = 1;
  std::size_t timing_reps = 5;
  std::size_t timing_queries = 500;  // queries timed per repetition; 0 = all
  std::size_t token_reps = 50;
  std::size_t z_bits = 0;  // 0 = sized from N
  std::vector<DatasetSpec> datasets;
};

/// Reads the JSON config; unknown keys are rejected. `CONNOR_SEED`, when set,
/// overrides the top-level seed.
BenchConfig parse_config(const nlohmann::json& j);
BenchConfig load_config(const std::string& path);
void apply_seed_env(BenchConfig& cfg);

Graph make_graph(const DatasetSpec& spec);

/// `query_count` reachable pairs with s != t, each with `thetas_per_pair`
/// budgets uniform on [c_min, c_max]. Throws Error when too few reachable
/// pairs turn up after 100 * query_count draws.
std::vector<CsdQuery> gen_query_set(const Graph& g, const BenchConfig& cfg);

/// Plaintext index, client keys and encrypted index for one graph.
struct Dataset {
  std::string name;
  Graph g;
  LabelIndex idx;
  crypto::TransparentSwhe backend;
  ClientKeys keys;
  SetupParams params;
  EncryptedIndex enc;
  double label_build_s = 0;
  double encrypt_s = 0;
  std::size_t index_bytes = 0;
  std::unique_ptr<EntryDecoder> decoder;

  /// phi is drawn from `seed`; K and the SWHE keys come from the CSPRNG.
  Dataset(std::string name, Graph g, const Rational& alpha, std::uint64_t seed, std::size_t z_bits = 0);
  Dataset(const Dataset&) = delete;
  Dataset& operator=(const Dataset&) = delete;
};

/// Server answer plus the client's view of every admitted pair.
struct QueryOutcome {
  std::size_t y_size = 0;
  std::size_t true_pos = 0;   // admitted pairs whose real cost fits theta
  std::size_t false_pos = 0;  // admitted pairs whose real cost exceeds theta
  std::size_t uncertain = 0;
  std::vector<HubPair> admitted;    // decoded with client keys
  std::optional<std::int64_t> r_e;  // recovered encrypted answer
  std::optional<std::uint64_t> r_p; // plain index answer
};

QueryOutcome evaluate_query(const Dataset& ds, const CsdQuery& q, int depth);

/// Mean of Tp / (Tp + Fp) over queries with a nonempty Y; nullopt if none.
std::optional<double> precision_of(const std::vector<QueryOutcome>& outcomes);

struct Deviation {
  std::vector<double> xi;  // sorted ascending
  std::size_t excluded = 0;
};

/// r_e / r_p for queries where both sides answer and r_p > 0.
Deviation deviation_of(const std::vector<QueryOutcome>& outcomes);

std::optional<double> bench_precision(const Dataset& ds, const std::vector<CsdQuery>& qs, int depth);
Deviation bench_deviation(const Dataset& ds, const std::vector<CsdQuery>& qs, int depth);

struct Timing {
  double mean_ms = 0;
  double sd_ms = 0;
};

/// Per-depth encrypted query time (server side, token already parsed) and the
/// plain-index time. Depths are interleaved per query so drift spreads evenly;
/// each repetition yields one mean, and mean/sd are over repetitions.
struct QueryTimings {
  std::vector<Timing> encrypted;  // parallel to depths
  Timing plain;
};
QueryTimings time_queries(const Dataset& ds, const std::vector<CsdQuery>& qs, const std::vector<int>& depths,
                          std::size_t reps);

/// Mean token generation time per depth over `reps` builds.
std::vector<Timing> time_tokens(const Dataset& ds, const std::vector<CsdQuery>& qs, const std::vector<int>& depths,
                                std::size_t reps);

struct DepthMetrics {
  int depth = 0;
  std::size_t token_bytes = 0;
  Timing token;
  Timing query;
  Timing plain;
  std::optional<double> precision_mean;
  std::size_t precision_queries = 0;
  Deviation deviation;
};

struct Metrics {
  std::string dataset;
  std::size_t n = 0;
  std::size_t m = 0;
  Rational alpha;
  double index_build_s = 0;
  std::size_t index_bytes = 0;
  std::size_t omega_out = 0;
  std::size_t omega_in = 0;
  std::uint32_t B = 0;
  std::size_t queries = 0;
  std::vector<DepthMetrics> depths;
};

Metrics run_dataset(const Dataset& ds, const BenchConfig& cfg);
std::vector<Metrics> run_bench(const BenchConfig& cfg, std::ostream* log = nullptr);

enum class ReportFormat { kText, kCsv, kJson };
ReportFormat parse_format(std::string_view s);

/// One row per (dataset, depth). Column order is fixed.
std::string report(const std::vector<Metrics>& metrics, ReportFormat format);
const std::vector<std::string>& csv_columns();

}  // namespace connor::bench
