#include "connor/query_engine.hpp"

#include <algorithm>

namespace connor {

QueryToken gen_token(const crypto::PrfKey& K, std::uint64_t phi, std::string_view s_label, std::string_view t_label,
                     std::uint64_t theta, int depth) {
  if (depth < 1 || depth > kMaxTreeDepth) throw Error("tree depth must be in [1, 8]");
  if (phi < (std::uint64_t{1} << depth)) throw Error("phi must be at least 2^depth");
  if (static_cast<unsigned __int128>(phi) * theta > ~std::uint64_t{0})
    throw OverflowError("phi * theta exceeds the 64-bit ORE domain");
  QueryToken tok;
  tok.s_out = vertex_prf(K, s_label, VertexTag::kOutMask);
  tok.t_out = vertex_prf(K, s_label, VertexTag::kOutKey);
  tok.s_in = vertex_prf(K, t_label, VertexTag::kInMask);
  tok.t_in = vertex_prf(K, t_label, VertexTag::kInKey);
  tok.tree = build_tree(ore_key_from(K), phi * theta, depth);
  return tok;
}

Bytes serialize_token(const QueryToken& tok) {
  ByteWriter w;
  w.put(tok.s_out);
  w.put(tok.t_out);
  w.put(tok.s_in);
  w.put(tok.t_in);
  write_tree(w, tok.tree);
  return w.take();
}

QueryToken deserialize_token(ByteView bytes) {
  ByteReader r(bytes);
  QueryToken tok;
  tok.s_out = r.array<16>();
  tok.t_out = r.array<16>();
  tok.s_in = r.array<16>();
  tok.t_in = r.array<16>();
  tok.tree = read_tree(r);
  if (!r.done()) throw FormatError("trailing bytes after token");
  return tok;
}

std::vector<EntryPayload> unroll_sketch(const EncryptedIndex& enc, Side side, const Label16& key_label,
                                        const Label16& mask_label) {
  std::vector<EntryPayload> out;
  const Dictionary& dict = enc.dict(side);
  std::optional<crypto::HmacSha256> S;
  Bytes plain(enc.record_bytes());
  for (std::uint64_t omega = 0;; ++omega) {
    auto rec = dict.find(entry_key(key_label, omega));
    if (!rec) break;
    if (!S) S.emplace(mask_label);
    entry_pad(*S, omega, plain);
    for (std::size_t i = 0; i < plain.size(); ++i) plain[i] ^= (*rec)[i];
    out.push_back(split_payload(plain, enc.z_bits));
  }
  return out;
}

std::size_t QueryTrace::admitted() const {
  return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(), [](const Pair& p) {
    return p.verdict != CompareOutcome::kGreater;
  }));
}

EncryptedResult server_query(const EncryptedIndex& enc, const crypto::SwheBackend& backend, const QueryToken& tok,
                             QueryTrace* trace) {
  if (backend.ciphertext_bits() != enc.z_bits) throw Error("SWHE backend width differs from the index");
  std::vector<EntryPayload> ls = unroll_sketch(enc, Side::kOut, tok.t_out, tok.s_out);
  std::vector<EntryPayload> lt = unroll_sketch(enc, Side::kIn, tok.t_in, tok.s_in);

  std::vector<std::uint32_t> cs(ls.size()), ct(lt.size());
  for (std::size_t i = 0; i < ls.size(); ++i) cs[i] = path_code(tok.tree, ls[i].C);
  for (std::size_t j = 0; j < lt.size(); ++j) ct[j] = path_code(tok.tree, lt[j].C);

  std::vector<std::size_t> by_v(lt.size());
  for (std::size_t j = 0; j < lt.size(); ++j) by_v[j] = j;
  std::sort(by_v.begin(), by_v.end(), [&](std::size_t a, std::size_t b) { return lt[a].V < lt[b].V; });

  EncryptedResult res;
  std::optional<crypto::SwheCiphertext> sum;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    auto lo = std::lower_bound(by_v.begin(), by_v.end(), ls[i].V,
                               [&](std::size_t j, const Label16& v) { return lt[j].V < v; });
    for (auto it = lo; it != by_v.end() && lt[*it].V == ls[i].V; ++it) {
      const std::size_t j = *it;
      const CompareOutcome verdict = compare_codes(cs[i], ct[j], tok.tree.depth);
      if (trace) trace->pairs.push_back({i, j, verdict});
      if (verdict == CompareOutcome::kGreater) continue;
      auto prod = backend.mul(ls[i].D, lt[j].D);
      sum = sum ? backend.add(*sum, prod) : std::move(prod);
      ++res.y_size;
    }
  }
  if (sum) {
    res.empty = false;
    res.d = std::move(*sum);
  }
  if (trace) {
    trace->ls = std::move(ls);
    trace->lt = std::move(lt);
  }
  return res;
}

Bytes serialize_result(const EncryptedResult& res, bool hide_y_size) {
  ByteWriter w;
  w.put_u8(res.empty ? 1 : 0);
  w.put_be(hide_y_size ? 0 : res.y_size, 4);
  if (!res.empty) w.put(res.d.bytes);
  return w.take();
}

EncryptedResult deserialize_result(ByteView bytes, std::size_t z_bits) {
  ByteReader r(bytes);
  EncryptedResult res;
  const std::uint8_t flags = r.u8();
  if (flags & ~1u) throw FormatError("unknown result flags");
  res.empty = flags & 1;
  res.y_size = static_cast<std::uint32_t>(r.be(4));
  if (!res.empty) {
    auto c = r.take(z_bits / 8);
    res.d.bytes.assign(c.begin(), c.end());
  }
  if (!r.done()) throw FormatError("trailing bytes after result");
  return res;
}

std::optional<std::int64_t> recover_from_message(const mpz_class& m, std::uint32_t N) {
  if (m <= 0) return std::nullopt;
  const std::size_t log2m = mpz_sizeinbase(m.get_mpz_t(), 2) - 1;
  if (log2m > 2 * std::size_t{N} + 20) throw CryptoError("decrypted sum exceeds the expected message range");
  return static_cast<std::int64_t>(2 * std::int64_t{N}) - static_cast<std::int64_t>(log2m);
}

std::optional<std::int64_t> recover_distance(const crypto::SwheBackend& backend, const crypto::SwheSecretKey& sk,
                                             const EncryptedResult& res, std::uint32_t N) {
  if (res.empty) return std::nullopt;
  return recover_from_message(backend.decrypt(sk, res.d), N);
}

}  // namespace connor
