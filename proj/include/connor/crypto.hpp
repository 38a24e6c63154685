#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>

#include "connor/common.hpp"

typedef struct evp_md_ctx_st EVP_MD_CTX;

namespace connor::crypto {

/// Security parameter in bits; every PRF key and h output is this wide.
inline constexpr std::size_t kLambdaBits = 128;

/// ORE ciphertext width in bits: 64 base-3 digits packed two bits each.
inline constexpr std::size_t kOreBits = 128;

struct PrfKey {
  Label16 bytes{};

  /// Fresh key from the OpenSSL CSPRNG.
  static PrfKey random();

  friend bool operator==(const PrfKey&, const PrfKey&) = default;
};

/// Fills `out` from the OpenSSL CSPRNG; throws CryptoError on failure.
void random_bytes(std::span<std::uint8_t> out);

/// HMAC-SHA256 with the keyed inner/outer states precomputed, so repeated
/// MACs under one key cost two compressions plus the message.
class HmacSha256 {
 public:
  explicit HmacSha256(ByteView key);
  HmacSha256(const HmacSha256& other);
  HmacSha256& operator=(const HmacSha256& other);
  HmacSha256(HmacSha256&&) noexcept = default;
  HmacSha256& operator=(HmacSha256&&) noexcept = default;
  ~HmacSha256();

  std::array<std::uint8_t, 32> mac(ByteView msg) const;
  /// MAC over the concatenation a || b without materializing it.
  std::array<std::uint8_t, 32> mac(ByteView a, ByteView b) const;

 private:
  struct CtxDeleter {
    void operator()(EVP_MD_CTX* ctx) const;
  };
  std::unique_ptr<EVP_MD_CTX, CtxDeleter> inner_;
  std::unique_ptr<EVP_MD_CTX, CtxDeleter> outer_;
};

/// h : {0,1}^128 x {0,1}* -> {0,1}^128 (HMAC-SHA256 truncated).
Label16 prf_h(const Label16& key, ByteView msg);

/// g : {0,1}^128 x {0,1}* -> {0,1}^out_bits. HMAC-SHA256 over msg || u32be(i)
/// for i = 0, 1, ..., concatenated and truncated. `out_bits` must be a
/// multiple of 8.
Bytes prf_g(const Label16& key, ByteView msg, std::size_t out_bits);

/// Same as prf_g with a caller-held MAC state (the query server reuses one
/// state per unrolled sketch).
void prf_g(const HmacSha256& mac, ByteView msg, std::span<std::uint8_t> out);

/// `label || tag`: the PRF input for a vertex with a one-byte role tag.
Bytes tagged(std::string_view label, std::uint8_t tag);

/// Fixed 8-byte big-endian counter encoding.
std::array<std::uint8_t, 8> counter_bytes(std::uint64_t omega);

// ---------------------------------------------------------------------------
// Order-revealing encryption.
//
// For plaintext bits b_1..b_64 (most significant first) the i-th digit is
// (F(k, i || b_1..b_{i-1}) + b_i) mod 3. Two ciphertexts are compared by
// locating the first differing digit; the plaintext with digit one larger
// (mod 3) there is the larger one. Ciphertexts reveal the order and the
// index of the first differing bit.

using OreCiphertext = std::array<std::uint8_t, kOreBits / 8>;

enum class Order { kLess, kEqual, kGreater };

class OreKey {
 public:
  explicit OreKey(const PrfKey& key);

  OreCiphertext encrypt(std::uint64_t m) const;
  /// Client-side inversion (needs the key): recovers every bit from its digit.
  std::uint64_t decrypt(const OreCiphertext& ct) const;

 private:
  std::uint8_t digit_pad(int i, std::uint64_t prefix) const;

  HmacSha256 prf_;
};

OreCiphertext ore_encrypt(const PrfKey& key, std::uint64_t m);
Order ore_compare(const OreCiphertext& a, const OreCiphertext& b);
/// Byte-level variant; throws FormatError on width mismatch.
Order ore_compare(ByteView a, ByteView b);

}  // namespace connor::crypto
