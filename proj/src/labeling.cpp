#include "connor/labeling.hpp"

#include <algorithm>
#include <charconv>
#include <iostream>
#include <numeric>
#include <queue>
#include <tuple>

namespace connor {

Rational Rational::parse(std::string_view text) {
  auto to_u32 = [&](std::string_view s) {
    std::uint32_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw Error("invalid ratio '" + std::string(text) + "'");
    return v;
  };
  Rational r;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    r = {to_u32(text.substr(0, slash)), to_u32(text.substr(slash + 1))};
  } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
    auto frac = text.substr(dot + 1);
    if (frac.size() > 6) throw Error("too many decimal places in '" + std::string(text) + "'");
    std::uint32_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    r = {to_u32(text.substr(0, dot)) * den + (frac.empty() ? 0 : to_u32(frac)), den};
  } else {
    r = {to_u32(text), 1};
  }
  if (r.den == 0) throw Error("zero denominator in '" + std::string(text) + "'");
  auto g = std::gcd(r.num, r.den);
  r.num /= g;
  r.den /= g;
  if (r.num < r.den) throw Error("approximation ratio must be >= 1");
  return r;
}

std::string Rational::to_string() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

bool alpha_dominates(const ParetoLabel& e1, const ParetoLabel& e2, const Rational& alpha) {
  using u128 = unsigned __int128;
  return e1.cost <= e2.cost && u128{e1.dist} * alpha.den <= u128{e2.dist} * alpha.num;
}

std::size_t LabelIndex::out_entries() const {
  std::size_t n = 0;
  for (const auto& s : out) n += s.size();
  return n;
}

std::size_t LabelIndex::in_entries() const {
  std::size_t n = 0;
  for (const auto& s : in) n += s.size();
  return n;
}

namespace {

std::uint32_t narrow(std::uint64_t v) {
  if (v > std::numeric_limits<std::uint32_t>::max()) throw OverflowError("sketch weight exceeds 32 bits");
  return static_cast<std::uint32_t>(v);
}

struct Label {
  std::uint64_t dist;
  std::uint64_t cost;
  VertexId vertex;
  std::uint32_t parent;

  bool operator>(const Label& o) const {
    return std::tie(dist, cost, vertex) > std::tie(o.dist, o.cost, o.vertex);
  }
};

constexpr std::uint32_t kRoot = std::numeric_limits<std::uint32_t>::max();
constexpr std::uint64_t kUnset = std::numeric_limits<std::uint64_t>::max();

class Builder {
 public:
  Builder(const Graph& g, const Rational& alpha, const BuildOptions& opts, EntryPaths* paths)
      : g_(g), alpha_(alpha), opts_(opts), paths_(paths), n_(g.num_vertices()),
        hub_side_(n_), min_cost_(n_, kUnset), found_(n_) {
    idx_.alpha = alpha;
    idx_.out.resize(n_);
    idx_.in.resize(n_);
    if (paths_) {
      paths_->out.assign(n_, {});
      paths_->in.assign(n_, {});
    }
  }

  LabelIndex run() {
    std::vector<VertexId> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](VertexId a, VertexId b) {
      return g_.out_arcs(a).size() + g_.in_arcs(a).size() > g_.out_arcs(b).size() + g_.in_arcs(b).size();
    });

    for (VertexId landmark : order) {
      append(idx_.out[landmark], landmark, {0, 0}, {landmark}, paths_ ? &paths_->out[landmark] : nullptr);
      append(idx_.in[landmark], landmark, {0, 0}, {landmark}, paths_ ? &paths_->in[landmark] : nullptr);
      search(landmark, /*forward=*/true);
      search(landmark, /*forward=*/false);
    }

    for (VertexId v = 0; v < n_; ++v) {
      canonicalize(idx_.out[v], paths_ ? &paths_->out[v] : nullptr);
      canonicalize(idx_.in[v], paths_ ? &paths_->in[v] : nullptr);
    }
    for (const auto* side : {&idx_.out, &idx_.in})
      for (const auto& sketch : *side)
        for (const auto& e : sketch) idx_.max_dist_B = std::max(idx_.max_dist_B, e.dist);
    return std::move(idx_);
  }

 private:
  // Forward: paths landmark -> u, stored in in[u]. Backward: u -> landmark, stored in out[u].
  void search(VertexId landmark, bool forward) {
    // The landmark's own sketch on the opposite side, grouped by hub.
    const auto& own = forward ? idx_.out[landmark] : idx_.in[landmark];
    std::vector<VertexId> touched;
    for (const auto& e : own) {
      if (hub_side_[e.hub].empty()) touched.push_back(e.hub);
      hub_side_[e.hub].push_back({e.dist, e.cost});
    }

    std::vector<Label> pool;
    std::vector<VertexId> reached;
    std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;
    heap.push({0, 0, landmark, kRoot});

    while (!heap.empty()) {
      Label l = heap.top();
      heap.pop();
      if (min_cost_[l.vertex] != kUnset && l.cost >= min_cost_[l.vertex]) continue;
      min_cost_[l.vertex] = l.cost;
      if (l.vertex != landmark) {
        const auto& far = forward ? idx_.in[l.vertex] : idx_.out[l.vertex];
        if (covered(far, l.dist, l.cost)) continue;
      }
      const auto id = static_cast<std::uint32_t>(pool.size());
      pool.push_back(l);
      if (l.vertex != landmark) {
        if (found_[l.vertex].empty()) reached.push_back(l.vertex);
        found_[l.vertex].push_back(id);
      }
      auto arcs = forward ? g_.out_arcs(l.vertex) : g_.in_arcs(l.vertex);
      for (const Arc& a : arcs) {
        Label next{add(l.dist, a.attr.dist), add(l.cost, a.attr.cost), a.to, id};
        if (min_cost_[a.to] != kUnset && next.cost >= min_cost_[a.to]) continue;
        heap.push(next);
      }
    }

    for (VertexId u : reached) {
      insert_cover(u, landmark, forward, pool);
      found_[u].clear();
    }
    std::fill(min_cost_.begin(), min_cost_.end(), kUnset);
    for (VertexId h : touched) hub_side_[h].clear();
  }

  bool covered(const std::vector<SketchEntry>& far, std::uint64_t dist, std::uint64_t cost) const {
    for (const auto& e : far) {
      for (const auto& [d, c] : hub_side_[e.hub]) {
        if (d + e.dist <= dist && c + e.cost <= cost) return true;
      }
    }
    return false;
  }

  // found_[u] holds settled labels in increasing distance, i.e. decreasing cost.
  void insert_cover(VertexId u, VertexId landmark, bool forward, const std::vector<Label>& pool) {
    std::vector<std::uint32_t> kept;
    for (auto it = found_[u].rbegin(); it != found_[u].rend(); ++it) {
      const Label& l = pool[*it];
      if (!kept.empty()) {
        const Label& last = pool[kept.back()];
        if (alpha_dominates({last.dist, last.cost}, {l.dist, l.cost}, alpha_)) continue;
      }
      kept.push_back(*it);
    }

    auto& sketch = forward ? idx_.in[u] : idx_.out[u];
    auto* sketch_paths = paths_ ? (forward ? &paths_->in[u] : &paths_->out[u]) : nullptr;
    if (opts_.sketch_cap && sketch.size() + kept.size() > opts_.sketch_cap) {
      const std::size_t room = opts_.sketch_cap > sketch.size() ? opts_.sketch_cap - sketch.size() : 0;
      if (!warned_) {
        std::cerr << "warning: sketch cap " << opts_.sketch_cap
                  << " reached; dropping entries (alpha guarantee no longer holds)\n";
        warned_ = true;
      }
      kept.resize(room);
    }
    for (auto id : kept) {
      std::vector<VertexId> path;
      if (sketch_paths) {
        for (std::uint32_t p = id; p != kRoot; p = pool[p].parent) path.push_back(pool[p].vertex);
        // Parent walk runs u..landmark; a forward entry describes landmark..u.
        if (forward) std::reverse(path.begin(), path.end());
      }
      append(sketch, landmark, {pool[id].dist, pool[id].cost}, std::move(path), sketch_paths);
    }
  }

  static void append(std::vector<SketchEntry>& sketch, VertexId hub, ParetoLabel l,
                     std::vector<VertexId> path, std::vector<std::vector<VertexId>>* paths) {
    sketch.push_back({hub, narrow(l.dist), narrow(l.cost)});
    if (paths) paths->push_back(std::move(path));
  }

  static void canonicalize(std::vector<SketchEntry>& sketch, std::vector<std::vector<VertexId>>* paths) {
    std::vector<std::size_t> perm(sketch.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(sketch[a].hub, sketch[a].cost, sketch[a].dist) <
             std::tie(sketch[b].hub, sketch[b].cost, sketch[b].dist);
    });
    std::vector<SketchEntry> sorted;
    sorted.reserve(sketch.size());
    for (auto i : perm) sorted.push_back(sketch[i]);
    sketch = std::move(sorted);
    if (paths) {
      std::vector<std::vector<VertexId>> p;
      p.reserve(perm.size());
      for (auto i : perm) p.push_back(std::move((*paths)[i]));
      *paths = std::move(p);
    }
  }

  static std::uint64_t add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("path weight overflow");
    return r;
  }

  const Graph& g_;
  Rational alpha_;
  BuildOptions opts_;
  EntryPaths* paths_;
  std::size_t n_;
  LabelIndex idx_;
  std::vector<std::vector<std::pair<std::uint64_t, std::uint64_t>>> hub_side_;
  std::vector<std::uint64_t> min_cost_;
  std::vector<std::vector<std::uint32_t>> found_;
  bool warned_ = false;
};

}  // namespace

LabelIndex build_index(const Graph& g, const Rational& alpha, const BuildOptions& opts, EntryPaths* paths) {
  if (alpha.den == 0 || alpha.num < alpha.den) throw Error("approximation ratio must be >= 1");
  return Builder(g, alpha, opts, paths).run();
}

std::vector<HubPair> hub_pairs(const LabelIndex& idx, VertexId s, VertexId t) {
  std::vector<HubPair> pairs;
  const auto& a = idx.out.at(s);
  const auto& b = idx.in.at(t);
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].hub < b[j].hub) {
      ++i;
    } else if (b[j].hub < a[i].hub) {
      ++j;
    } else {
      const VertexId hub = a[i].hub;
      std::size_t i_end = i, j_end = j;
      while (i_end < a.size() && a[i_end].hub == hub) ++i_end;
      while (j_end < b.size() && b[j_end].hub == hub) ++j_end;
      for (std::size_t x = i; x < i_end; ++x)
        for (std::size_t y = j; y < j_end; ++y) pairs.push_back({hub, a[x], b[y]});
      i = i_end;
      j = j_end;
    }
  }
  return pairs;
}

std::optional<HubPair> plain_query(const LabelIndex& idx, const CsdQuery& q) {
  std::optional<HubPair> best;
  for (const HubPair& p : hub_pairs(idx, q.s, q.t)) {
    if (p.cost() > q.theta) continue;
    if (!best || std::tuple(p.dist(), p.cost(), p.hub) < std::tuple(best->dist(), best->cost(), best->hub))
      best = p;
  }
  return best;
}

Bytes serialize_label_index(const LabelIndex& idx) {
  ByteWriter w;
  w.put("CNL1");
  w.put_le(idx.alpha.num, 4);
  w.put_le(idx.alpha.den, 4);
  w.put_le(idx.num_vertices(), 4);
  for (std::size_t v = 0; v < idx.num_vertices(); ++v) {
    for (const auto* sketch : {&idx.out[v], &idx.in[v]}) {
      w.put_le(sketch->size(), 4);
      for (const auto& e : *sketch) {
        w.put_le(e.hub, 4);
        w.put_le(e.dist, 4);
        w.put_le(e.cost, 4);
      }
    }
  }
  return w.take();
}

LabelIndex deserialize_label_index(ByteView bytes) {
  ByteReader r(bytes);
  r.expect_magic("CNL1");
  LabelIndex idx;
  idx.alpha.num = static_cast<std::uint32_t>(r.le(4));
  idx.alpha.den = static_cast<std::uint32_t>(r.le(4));
  if (idx.alpha.den == 0 || idx.alpha.num < idx.alpha.den) throw FormatError("invalid approximation ratio");
  const auto n = static_cast<std::size_t>(r.le(4));
  idx.out.resize(n);
  idx.in.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (auto* sketch : {&idx.out[v], &idx.in[v]}) {
      const auto count = static_cast<std::size_t>(r.le(4));
      if (count * 12 > r.remaining()) throw FormatError("truncated sketch");
      sketch->resize(count);
      for (auto& e : *sketch) {
        e.hub = static_cast<VertexId>(r.le(4));
        e.dist = static_cast<std::uint32_t>(r.le(4));
        e.cost = static_cast<std::uint32_t>(r.le(4));
        if (e.hub >= n) throw FormatError("hub index out of range");
        idx.max_dist_B = std::max(idx.max_dist_B, e.dist);
      }
    }
  }
  if (!r.done()) throw FormatError("trailing bytes after label index");
  return idx;
}

}  // namespace connor
