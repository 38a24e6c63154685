#include "connor/secure_index.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <unordered_map>

namespace connor {

using crypto::HmacSha256;
using crypto::PrfKey;

ClientKeys keygen(const crypto::SwheBackend& backend, std::size_t lambda_bits) {
  if (lambda_bits != crypto::kLambdaBits) throw CryptoError("only lambda = 128 is supported");
  return {PrfKey::random(), backend.keygen(lambda_bits)};
}

crypto::OreKey ore_key_from(const PrfKey& K) {
  PrfKey k;
  k.bytes = crypto::prf_h(K.bytes, as_bytes("connor-ore"));
  return crypto::OreKey(k);
}

Label16 vertex_prf(const PrfKey& K, std::string_view label, VertexTag tag) {
  return crypto::prf_h(K.bytes, crypto::tagged(label, static_cast<std::uint8_t>(tag)));
}

std::uint64_t choose_phi(std::mt19937_64& rng) {
  return std::uniform_int_distribution<std::uint64_t>(kPhiMin, kPhiMax)(rng);
}

SetupParams make_params(const LabelIndex& idx, std::uint64_t phi, std::size_t z_bits) {
  SetupParams p;
  p.alpha = idx.alpha;
  p.phi = phi;
  p.B = idx.max_dist_B;
  p.N = 2 * p.B + 1;
  p.z_bits = z_bits ? z_bits : crypto::swhe_bits_for(p.N);
  return p;
}

std::optional<ByteView> Dictionary::find(const Label16& key) const {
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return std::nullopt;
  return record(static_cast<std::size_t>(it - keys_.begin()));
}

void Dictionary::insert(const Label16& key, ByteView record) {
  if (record.size() != width_) throw FormatError("record width mismatch");
  keys_.push_back(key);
  records_.insert(records_.end(), record.begin(), record.end());
}

void Dictionary::seal() {
  std::vector<std::size_t> order(keys_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys_[a] < keys_[b]; });
  std::vector<Label16> keys(keys_.size());
  Bytes records(records_.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    keys[i] = keys_[order[i]];
    std::memcpy(records.data() + i * width_, records_.data() + order[i] * width_, width_);
    if (i > 0 && keys[i] == keys[i - 1]) throw CryptoError("dictionary key collision");
  }
  keys_ = std::move(keys);
  records_ = std::move(records);
}

Label16 entry_key(const Label16& T, std::uint64_t omega) { return crypto::prf_h(T, crypto::counter_bytes(omega)); }

void entry_pad(const HmacSha256& S, std::uint64_t omega, std::span<std::uint8_t> out) {
  crypto::prf_g(S, crypto::counter_bytes(omega), out);
}

EntryPayload split_payload(ByteView plain, std::size_t z_bits) {
  const std::size_t zb = z_bits / 8;
  if (plain.size() != 16 + zb + crypto::kOreBits / 8) throw FormatError("payload width mismatch");
  EntryPayload p;
  std::memcpy(p.V.data(), plain.data(), 16);
  p.D.bytes.assign(plain.begin() + 16, plain.begin() + 16 + zb);
  std::memcpy(p.C.data(), plain.data() + 16 + zb, p.C.size());
  return p;
}

namespace {

void check_params(const SetupParams& params, const LabelIndex& idx, const crypto::SwheBackend& backend,
                  std::size_t n_labels) {
  if (params.lambda_bits != crypto::kLambdaBits || params.k_bits != crypto::kOreBits)
    throw Error("unsupported lambda/k widths");
  if (params.B != idx.max_dist_B || params.N != 2 * params.B + 1) throw Error("setup parameters disagree with index B");
  if (backend.ciphertext_bits() != params.z_bits) throw Error("SWHE backend width differs from z");
  if (params.phi == 0) throw Error("phi must be positive");
  if (n_labels != idx.num_vertices()) throw Error("label table size differs from vertex count");
  if (2 * std::size_t{params.N} + 21 > backend.message_bits())
    throw Error("SWHE message space of " + std::to_string(backend.message_bits()) + " bits cannot hold 2^(2N+20) with N=" +
                std::to_string(params.N) + "; use a wider z (at least " +
                std::to_string(crypto::swhe_bits_for(params.N)) + ") or smaller distances");
  std::uint32_t max_cost = 0;
  for (const auto* side : {&idx.out, &idx.in})
    for (const auto& sk : *side)
      for (const auto& e : sk) max_cost = std::max(max_cost, e.cost);
  if (static_cast<unsigned __int128>(params.phi) * max_cost > ~std::uint64_t{0})
    throw OverflowError("phi * max cost exceeds the 64-bit ORE domain");
}

struct PayloadMaker {
  const ClientKeys& keys;
  const crypto::SwheBackend& backend;
  const SetupParams& params;
  crypto::OreKey ore;
  std::vector<Label16> vid;
  std::unordered_map<std::uint32_t, crypto::OreCiphertext> ore_cache;

  PayloadMaker(const ClientKeys& k, const crypto::SwheBackend& b, const SetupParams& p,
               const std::vector<std::string>& labels)
      : keys(k), backend(b), params(p), ore(ore_key_from(k.K)) {
    vid.reserve(labels.size());
    for (const auto& l : labels) vid.push_back(vertex_prf(k.K, l, VertexTag::kId));
  }

  EntryPayload make(const SketchEntry& e) {
    EntryPayload p;
    p.V = vid[e.hub];
    mpz_class m = 1;
    m <<= params.N - e.dist;
    p.D = backend.encrypt(keys.swhe.pk, m);
    auto it = ore_cache.find(e.cost);
    if (it == ore_cache.end()) it = ore_cache.emplace(e.cost, ore.encrypt(params.phi * e.cost)).first;
    p.C = it->second;
    return p;
  }

  void write(const EntryPayload& p, std::span<std::uint8_t> out) const {
    std::memcpy(out.data(), p.V.data(), 16);
    std::memcpy(out.data() + 16, p.D.bytes.data(), p.D.bytes.size());
    std::memcpy(out.data() + 16 + p.D.bytes.size(), p.C.data(), p.C.size());
  }
};

}  // namespace

EncryptedIndex setup(const ClientKeys& keys, const crypto::SwheBackend& backend, const SetupParams& params,
                     const LabelIndex& idx, const std::vector<std::string>& labels) {
  check_params(params, idx, backend, labels.size());
  EncryptedIndex enc;
  enc.lambda_bits = static_cast<std::uint32_t>(params.lambda_bits);
  enc.z_bits = static_cast<std::uint32_t>(params.z_bits);
  enc.k_bits = static_cast<std::uint32_t>(params.k_bits);
  enc.N = params.N;
  const std::size_t width = params.record_bytes();
  enc.out = Dictionary(width);
  enc.in = Dictionary(width);

  PayloadMaker maker(keys, backend, params, labels);
  Bytes plain(width), pad(width);
  for (std::size_t u = 0; u < idx.num_vertices(); ++u) {
    struct Pass {
      const std::vector<SketchEntry>& sketch;
      VertexTag mask, key;
      Dictionary& dict;
    };
    for (const Pass& pass : {Pass{idx.out[u], VertexTag::kOutMask, VertexTag::kOutKey, enc.out},
                             Pass{idx.in[u], VertexTag::kInMask, VertexTag::kInKey, enc.in}}) {
      const HmacSha256 S(vertex_prf(keys.K, labels[u], pass.mask));
      const Label16 T = vertex_prf(keys.K, labels[u], pass.key);
      for (std::uint64_t omega = 0; omega < pass.sketch.size(); ++omega) {
        maker.write(maker.make(pass.sketch[omega]), plain);
        entry_pad(S, omega, pad);
        for (std::size_t i = 0; i < width; ++i) pad[i] ^= plain[i];
        pass.dict.insert(entry_key(T, omega), pad);
      }
    }
  }
  enc.out.seal();
  enc.in.seal();
  return enc;
}

LeakageProfile leakage_profile(const LabelIndex& idx, const EncryptedIndex& enc) {
  LeakageProfile p{idx.num_vertices(), idx.max_dist_B, enc.out.size(), enc.in.size()};
  if (p.omega_out != idx.out_entries() || p.omega_in != idx.in_entries())
    throw Error("encrypted dictionary sizes disagree with the plaintext index");
  return p;
}

namespace {

constexpr std::uint16_t kIndexVersion = 1;

void write_dict(ByteWriter& w, const Dictionary& d) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    w.put(d.key(i));
    w.put(d.record(i));
  }
}

Dictionary read_dict(ByteReader& r, std::uint64_t count, std::size_t width) {
  if (count > r.remaining() / (16 + width)) throw FormatError("truncated input");
  Dictionary d(width);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto key = r.array<16>();
    d.insert(key, r.take(width));
  }
  d.seal();
  return d;
}

}  // namespace

Bytes serialize_index(const EncryptedIndex& enc) {
  ByteWriter w;
  w.put("CNE1");
  w.put_le(kIndexVersion, 2);
  w.put_le(enc.lambda_bits, 4);
  w.put_le(enc.z_bits, 4);
  w.put_le(enc.k_bits, 4);
  w.put_le(enc.N, 4);
  w.put_le(enc.out.size(), 8);
  w.put_le(enc.in.size(), 8);
  w.bytes().reserve(w.bytes().size() + (enc.out.size() + enc.in.size()) * (16 + enc.record_bytes()));
  write_dict(w, enc.out);
  write_dict(w, enc.in);
  return w.take();
}

EncryptedIndex deserialize_index(ByteView bytes) {
  ByteReader r(bytes);
  r.expect_magic("CNE1");
  if (r.le(2) != kIndexVersion) throw FormatError("unsupported index version");
  EncryptedIndex enc;
  enc.lambda_bits = static_cast<std::uint32_t>(r.le(4));
  enc.z_bits = static_cast<std::uint32_t>(r.le(4));
  enc.k_bits = static_cast<std::uint32_t>(r.le(4));
  enc.N = static_cast<std::uint32_t>(r.le(4));
  if (enc.lambda_bits != crypto::kLambdaBits || enc.k_bits != crypto::kOreBits || enc.z_bits % 8 != 0 ||
      enc.z_bits <= 8 * crypto::TransparentSwhe::kHeaderBytes)
    throw FormatError("unsupported index widths");
  const std::uint64_t n_out = r.le(8), n_in = r.le(8);
  enc.out = read_dict(r, n_out, enc.record_bytes());
  enc.in = read_dict(r, n_in, enc.record_bytes());
  if (!r.done()) throw FormatError("trailing bytes after index");
  return enc;
}

EntryDecoder::EntryDecoder(const ClientKeys& keys, const crypto::SwheBackend& backend, std::uint64_t phi,
                           std::uint32_t N, const std::vector<std::string>& labels)
    : keys_(keys), backend_(backend), phi_(phi), N_(N), ore_(ore_key_from(keys.K)) {
  for (std::size_t v = 0; v < labels.size(); ++v)
    by_vid_.emplace(vertex_prf(keys.K, labels[v], VertexTag::kId), static_cast<VertexId>(v));
}

std::uint32_t EntryDecoder::cost(const crypto::OreCiphertext& C) const {
  const std::uint64_t amp = ore_.decrypt(C);
  if (amp % phi_ != 0) throw CryptoError("cost ciphertext is not a multiple of phi");
  return static_cast<std::uint32_t>(amp / phi_);
}

SketchEntry EntryDecoder::decode(const EntryPayload& p) const {
  auto hub = by_vid_.find(p.V);
  if (hub == by_vid_.end()) throw CryptoError("entry names an unknown vertex");
  const mpz_class m = backend_.decrypt(keys_.swhe.sk, p.D);
  if (m <= 0 || mpz_popcount(m.get_mpz_t()) != 1) throw CryptoError("distance ciphertext is not a power of two");
  const std::size_t e = mpz_sizeinbase(m.get_mpz_t(), 2) - 1;
  if (e > N_) throw CryptoError("distance exponent exceeds N");
  return {hub->second, static_cast<std::uint32_t>(N_ - e), cost(p.C)};
}

LabelIndex decode_index(const EncryptedIndex& enc, const ClientKeys& keys, const crypto::SwheBackend& backend,
                        std::uint64_t phi, const std::vector<std::string>& labels) {
  const EntryDecoder decoder(keys, backend, phi, enc.N, labels);
  LabelIndex idx;
  idx.out.resize(labels.size());
  idx.in.resize(labels.size());
  Bytes plain(enc.record_bytes());
  std::size_t seen_out = 0, seen_in = 0;
  for (std::size_t u = 0; u < labels.size(); ++u) {
    struct Pass {
      Side side;
      VertexTag mask, key;
      std::vector<SketchEntry>& sketch;
      std::size_t& seen;
    };
    for (const Pass& pass : {Pass{Side::kOut, VertexTag::kOutMask, VertexTag::kOutKey, idx.out[u], seen_out},
                             Pass{Side::kIn, VertexTag::kInMask, VertexTag::kInKey, idx.in[u], seen_in}}) {
      const HmacSha256 S(vertex_prf(keys.K, labels[u], pass.mask));
      const Label16 T = vertex_prf(keys.K, labels[u], pass.key);
      for (std::uint64_t omega = 0;; ++omega) {
        auto rec = enc.dict(pass.side).find(entry_key(T, omega));
        if (!rec) break;
        entry_pad(S, omega, plain);
        for (std::size_t i = 0; i < plain.size(); ++i) plain[i] ^= (*rec)[i];
        pass.sketch.push_back(decoder.decode(split_payload(plain, enc.z_bits)));
        idx.max_dist_B = std::max(idx.max_dist_B, pass.sketch.back().dist);
        ++pass.seen;
      }
    }
  }
  if (seen_out != enc.out.size() || seen_in != enc.in.size())
    throw Error("index holds records not reachable from any vertex");
  return idx;
}

#ifdef CONNOR_UNSPLIT_SETUP
UnsplitIndex setup_unsplit(const ClientKeys& keys, const crypto::SwheBackend& backend, const SetupParams& params,
                           const LabelIndex& idx, const std::vector<std::string>& labels) {
  check_params(params, idx, backend, labels.size());
  PayloadMaker maker(keys, backend, params, labels);
  UnsplitIndex un;
  for (std::size_t u = 0; u < idx.num_vertices(); ++u) {
    auto& out = un.out[vertex_prf(keys.K, labels[u], VertexTag::kOutMask)];
    for (const auto& e : idx.out[u]) out.push_back(maker.make(e));
    auto& in = un.in[vertex_prf(keys.K, labels[u], VertexTag::kOutKey)];
    for (const auto& e : idx.in[u]) in.push_back(maker.make(e));
  }
  return un;
}
#endif

}  // namespace connor
