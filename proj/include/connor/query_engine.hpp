#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "connor/comparison_tree.hpp"
#include "connor/secure_index.hpp"

namespace connor {

struct QueryToken {
  Label16 s_out{};  // S_out,s
  Label16 t_out{};  // T_out,s
  Label16 s_in{};   // S_in,t
  Label16 t_in{};   // T_in,t
  CostTree tree;

  friend bool operator==(const QueryToken&, const QueryToken&) = default;
};

/// Deterministic in (K, phi, s, t, theta, depth). Requires phi >= 2^depth and
/// phi * theta inside the 64-bit ORE domain.
QueryToken gen_token(const crypto::PrfKey& K, std::uint64_t phi, std::string_view s_label, std::string_view t_label,
                     std::uint64_t theta, int depth = kDefaultTreeDepth);

/// 4 x 16-byte labels, 1-byte depth, level-order tree nodes.
Bytes serialize_token(const QueryToken& tok);
QueryToken deserialize_token(ByteView bytes);

/// Size of a serialized token of the given depth.
constexpr std::size_t token_bytes(int depth) {
  return 4 * 16 + 1 + ((std::size_t{1} << depth) - 1) * (crypto::kOreBits / 8);
}

/// Probes h(key_label, 0), h(key_label, 1), ... until the first miss and
/// unmasks each hit with g(mask_label, omega).
std::vector<EntryPayload> unroll_sketch(const EncryptedIndex& enc, Side side, const Label16& key_label,
                                        const Label16& mask_label);

struct EncryptedResult {
  bool empty = true;
  std::uint32_t y_size = 0;
  crypto::SwheCiphertext d;

  friend bool operator==(const EncryptedResult&, const EncryptedResult&) = default;
};

/// What the server saw while answering, for tests and the bench.
struct QueryTrace {
  struct Pair {
    std::size_t s_index;  // into ls
    std::size_t t_index;  // into lt
    CompareOutcome verdict;
  };
  std::vector<EntryPayload> ls;
  std::vector<EntryPayload> lt;
  std::vector<Pair> pairs;  // every V-matching cross pair, admitted or not

  std::size_t admitted() const;
};

EncryptedResult server_query(const EncryptedIndex& enc, const crypto::SwheBackend& backend, const QueryToken& tok,
                             QueryTrace* trace = nullptr);

/// flags (bit0 = empty), u32 big-endian |Y| (0 when hidden), ciphertext.
Bytes serialize_result(const EncryptedResult& res, bool hide_y_size = false);
EncryptedResult deserialize_result(ByteView bytes, std::size_t z_bits);

/// 2N - floor(log2 m) for m = Dec(d); nullopt when the result is empty or
/// m = 0. Throws CryptoError when m has more than 2N + 20 + 1 bits.
std::optional<std::int64_t> recover_distance(const crypto::SwheBackend& backend, const crypto::SwheSecretKey& sk,
                                             const EncryptedResult& res, std::uint32_t N);

/// Same recovery on an already decrypted value.
std::optional<std::int64_t> recover_from_message(const mpz_class& m, std::uint32_t N);

}  // namespace connor
