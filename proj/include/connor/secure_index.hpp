#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "connor/crypto.hpp"
#include "connor/labeling.hpp"
#include "connor/swhe.hpp"

namespace connor {

/// Role tags appended to a vertex label before it is fed to h.
enum class VertexTag : std::uint8_t { kId = 0, kOutMask = 1, kOutKey = 2, kInMask = 3, kInKey = 4 };

enum class Side { kOut, kIn };

/// Everything the client keeps secret.
struct ClientKeys {
  crypto::PrfKey K;
  crypto::SwheKeyPair swhe;
};

ClientKeys keygen(const crypto::SwheBackend& backend, std::size_t lambda_bits = crypto::kLambdaBits);

/// ORE key derived from K under a fixed domain-separation string.
crypto::OreKey ore_key_from(const crypto::PrfKey& K);

/// h(K, label || tag).
Label16 vertex_prf(const crypto::PrfKey& K, std::string_view label, VertexTag tag);

struct SetupParams {
  Rational alpha;
  std::uint64_t phi = 0;
  std::size_t lambda_bits = crypto::kLambdaBits;
  std::size_t z_bits = 2048;
  std::size_t k_bits = crypto::kOreBits;
  std::uint32_t B = 0;
  std::uint32_t N = 1;

  std::size_t record_bytes() const { return (lambda_bits + z_bits + k_bits) / 8; }
};

inline constexpr std::uint64_t kPhiMin = std::uint64_t{1} << 20;
inline constexpr std::uint64_t kPhiMax = std::uint64_t{1} << 24;

/// Uniform on [2^20, 2^24].
std::uint64_t choose_phi(std::mt19937_64& rng);

/// Fills B, N = 2B+1 and the widths from the index. `z_bits` = 0 picks the
/// smallest width that holds the encoded distances.
SetupParams make_params(const LabelIndex& idx, std::uint64_t phi, std::size_t z_bits = 0);

/// One dictionary: sorted 16-byte keys with fixed-width records alongside.
class Dictionary {
 public:
  Dictionary() = default;
  explicit Dictionary(std::size_t record_bytes) : width_(record_bytes) {}

  std::size_t size() const { return keys_.size(); }
  std::size_t record_bytes() const { return width_; }
  const Label16& key(std::size_t i) const { return keys_[i]; }
  ByteView record(std::size_t i) const { return {records_.data() + i * width_, width_}; }

  std::optional<ByteView> find(const Label16& key) const;

  /// Appends without ordering; call seal() once all records are in.
  void insert(const Label16& key, ByteView record);
  /// Sorts by key; throws CryptoError on a duplicate key.
  void seal();

  friend bool operator==(const Dictionary&, const Dictionary&) = default;

 private:
  std::size_t width_ = 0;
  std::vector<Label16> keys_;
  Bytes records_;
};

/// Server-side encrypted index. Carries only the public widths and N.
struct EncryptedIndex {
  std::uint32_t lambda_bits = crypto::kLambdaBits;
  std::uint32_t z_bits = 0;
  std::uint32_t k_bits = crypto::kOreBits;
  std::uint32_t N = 0;
  Dictionary out;
  Dictionary in;

  std::size_t record_bytes() const { return (lambda_bits + z_bits + k_bits) / 8; }
  const Dictionary& dict(Side s) const { return s == Side::kOut ? out : in; }

  friend bool operator==(const EncryptedIndex&, const EncryptedIndex&) = default;
};

/// Entry payload V || D || C, either freshly built or unmasked from a record.
struct EntryPayload {
  Label16 V{};
  crypto::SwheCiphertext D;
  crypto::OreCiphertext C{};

  friend bool operator==(const EntryPayload&, const EntryPayload&) = default;
};

/// Builds the split dictionary index: the omega-th entry of u's out sketch is
/// stored under h(T_out,u, omega) and masked with g(S_out,u, omega); in
/// sketches likewise with the in keys.
EncryptedIndex setup(const ClientKeys& keys, const crypto::SwheBackend& backend, const SetupParams& params,
                     const LabelIndex& idx, const std::vector<std::string>& labels);

/// Dictionary key and pad for entry omega under parent labels (T, S).
Label16 entry_key(const Label16& T, std::uint64_t omega);
void entry_pad(const crypto::HmacSha256& S, std::uint64_t omega, std::span<std::uint8_t> out);

EntryPayload split_payload(ByteView plain, std::size_t z_bits);

struct LeakageProfile {
  std::size_t n = 0;
  std::uint32_t B = 0;
  std::size_t omega_out = 0;
  std::size_t omega_in = 0;

  friend bool operator==(const LeakageProfile&, const LeakageProfile&) = default;
};

/// (n, B, |I_out|, |I_in|); throws Error when the dictionary sizes disagree
/// with the plaintext entry totals.
LeakageProfile leakage_profile(const LabelIndex& idx, const EncryptedIndex& enc);

/// `CNE1` file: little-endian header, then out records, then in records,
/// each as 16-byte key + record, in key order.
Bytes serialize_index(const EncryptedIndex& enc);
EncryptedIndex deserialize_index(ByteView bytes);

/// Client-side inverse of one payload: V back to a vertex, D to a distance
/// (N minus the exponent of the decrypted power of two), C to a cost.
class EntryDecoder {
 public:
  EntryDecoder(const ClientKeys& keys, const crypto::SwheBackend& backend, std::uint64_t phi, std::uint32_t N,
               const std::vector<std::string>& labels);

  SketchEntry decode(const EntryPayload& p) const;
  std::uint32_t cost(const crypto::OreCiphertext& C) const;

 private:
  const ClientKeys& keys_;
  const crypto::SwheBackend& backend_;
  std::uint64_t phi_;
  std::uint32_t N_;
  crypto::OreKey ore_;
  std::map<Label16, VertexId> by_vid_;
};

/// Client-side full decode with K and sk: walks every vertex's buckets and
/// maps V back to a vertex, D to a distance, C to a cost. The result has the
/// same layout as the plaintext index (alpha left at its default).
LabelIndex decode_index(const EncryptedIndex& enc, const ClientKeys& keys, const crypto::SwheBackend& backend,
                        std::uint64_t phi, const std::vector<std::string>& labels);

#ifdef CONNOR_UNSPLIT_SETUP
/// Single-bucket variant: all of u's out entries live unmasked in one list
/// under h(K, u||1), in entries under h(K, u||2). Kept to cross-check the
/// split layout; it leaks sketch sizes and cost order.
struct UnsplitIndex {
  std::map<Label16, std::vector<EntryPayload>> out;
  std::map<Label16, std::vector<EntryPayload>> in;
};

UnsplitIndex setup_unsplit(const ClientKeys& keys, const crypto::SwheBackend& backend, const SetupParams& params,
                           const LabelIndex& idx, const std::vector<std::string>& labels);
#endif

}  // namespace connor
