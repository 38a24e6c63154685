#include <iomanip>
#include <sstream>

#include "connor/bench.hpp"

namespace connor::bench {

using json = nlohmann::json;

ReportFormat parse_format(std::string_view s) {
  if (s == "text") return ReportFormat::kText;
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "json") return ReportFormat::kJson;
  throw Error("report format must be text, csv or json");
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "dataset",    "n",          "m",           "alpha",        "index_build_s",     "index_bytes",
      "omega_out",  "omega_in",   "B",           "queries",      "depth",             "token_bytes",
      "token_ms",   "query_ms",   "query_sd_ms", "plain_ms",     "precision_mean",    "precision_queries",
      "xi_count",   "xi_excluded", "xi_min",     "xi_median",    "xi_frac_ge_0.90"};
  return cols;
}

namespace {

std::string fmt(double v, int prec = 6) {
  std::ostringstream o;
  o << std::setprecision(prec) << v;
  return o.str();
}

double frac_at_least(const std::vector<double>& xs, double bound) {
  if (xs.empty()) return 0;
  std::size_t c = 0;
  for (double x : xs) c += x >= bound;
  return static_cast<double>(c) / static_cast<double>(xs.size());
}

std::vector<std::string> row(const Metrics& m, const DepthMetrics& d) {
  const auto& xi = d.deviation.xi;
  return {m.dataset,
          std::to_string(m.n),
          std::to_string(m.m),
          m.alpha.to_string(),
          fmt(m.index_build_s),
          std::to_string(m.index_bytes),
          std::to_string(m.omega_out),
          std::to_string(m.omega_in),
          std::to_string(m.B),
          std::to_string(m.queries),
          std::to_string(d.depth),
          std::to_string(d.token_bytes),
          fmt(d.token.mean_ms),
          fmt(d.query.mean_ms),
          fmt(d.query.sd_ms),
          fmt(d.plain.mean_ms),
          d.precision_mean ? fmt(*d.precision_mean) : "",
          std::to_string(d.precision_queries),
          std::to_string(xi.size()),
          std::to_string(d.deviation.excluded),
          xi.empty() ? "" : fmt(xi.front()),
          xi.empty() ? "" : fmt(xi[xi.size() / 2]),
          xi.empty() ? "" : fmt(frac_at_least(xi, 0.90))};
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json timing_json(const Timing& t) { return {{"mean_ms", t.mean_ms}, {"sd_ms", t.sd_ms}}; }

}  // namespace

std::string report(const std::vector<Metrics>& metrics, ReportFormat format) {
  std::ostringstream out;
  const auto& cols = csv_columns();
  switch (format) {
    case ReportFormat::kCsv: {
      for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
      out << "\n";
      for (const auto& m : metrics)
        for (const auto& d : m.depths) {
          auto r = row(m, d);
          for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_escape(r[i]);
          out << "\n";
        }
      break;
    }
    case ReportFormat::kText: {
      std::vector<std::vector<std::string>> rows{cols};
      for (const auto& m : metrics)
        for (const auto& d : m.depths) rows.push_back(row(m, d));
      std::vector<std::size_t> width(cols.size(), 0);
      for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
      for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i)
          out << (i ? "  " : "") << std::left << std::setw(static_cast<int>(width[i])) << r[i];
        out << "\n";
      }
      break;
    }
    case ReportFormat::kJson: {
      json j = {{"datasets", json::array()}};
      for (const auto& m : metrics) {
        json dj = {{"dataset", m.dataset},     {"n", m.n},
                   {"m", m.m},                 {"alpha", m.alpha.to_string()},
                   {"index_build_s", m.index_build_s}, {"index_bytes", m.index_bytes},
                   {"omega_out", m.omega_out}, {"omega_in", m.omega_in},
                   {"B", m.B},                 {"queries", m.queries},
                   {"depths", json::array()}};
        for (const auto& d : m.depths) {
          dj["depths"].push_back({{"depth", d.depth},
                                  {"token_bytes", d.token_bytes},
                                  {"token", timing_json(d.token)},
                                  {"query", timing_json(d.query)},
                                  {"plain", timing_json(d.plain)},
                                  {"precision_mean", d.precision_mean ? json(*d.precision_mean) : json(nullptr)},
                                  {"precision_queries", d.precision_queries},
                                  {"xi", d.deviation.xi},
                                  {"xi_excluded", d.deviation.excluded}});
        }
        j["datasets"].push_back(std::move(dj));
      }
      out << j.dump(2) << "\n";
      break;
    }
  }
  return out.str();
}

}  // namespace connor::bench
