#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <string_view>

#include "connor/common.hpp"

namespace connor::crypto {

/// Fresh ciphertexts may be multiplied once; products may only be added.
enum class Level : std::uint8_t { kFresh = 1, kProduct = 2 };

/// Fixed-width (z bits) ciphertext. The level tag is part of the byte image.
struct SwheCiphertext {
  Bytes bytes;

  Level level() const;

  friend bool operator==(const SwheCiphertext&, const SwheCiphertext&) = default;
};

struct SwhePublicKey {
  Bytes blob;
};

struct SwheSecretKey {
  Bytes blob;
};

struct SwheKeyPair {
  SwhePublicKey pk;
  SwheSecretKey sk;
};

/// Somewhat-homomorphic encryption contract used by the index and the query
/// engine:
///   Dec(add(Enc a, Enc b)) = a + b     for any two same-level inputs
///   Dec(mul(Enc a, Enc b)) = a * b     for fresh inputs only
/// Ciphertexts serialize to exactly ciphertext_bits() bits. A secure
/// pairing-based backend plugs in behind this interface.
class SwheBackend {
 public:
  virtual ~SwheBackend() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t ciphertext_bits() const = 0;
  /// Messages must stay below 2^message_bits(), products and sums included.
  virtual std::size_t message_bits() const = 0;

  virtual SwheKeyPair keygen(std::size_t lambda_bits) const = 0;
  virtual SwheCiphertext encrypt(const SwhePublicKey& pk, const mpz_class& m) const = 0;
  virtual SwheCiphertext add(const SwheCiphertext& a, const SwheCiphertext& b) const = 0;
  virtual SwheCiphertext mul(const SwheCiphertext& a, const SwheCiphertext& b) const = 0;
  virtual mpz_class decrypt(const SwheSecretKey& sk, const SwheCiphertext& c) const = 0;
};

/// Arithmetic-faithful reference backend. NOT SECURE: the message is stored in
/// the clear next to a random nonce, so anyone holding a ciphertext can read
/// it. It exists to check the homomorphic bookkeeping exactly at desk scale.
///
/// Layout of the z/8-byte image: [level:1][nonce:15][message: z/8-16, big-endian].
/// Encryption draws a fresh nonce; add/mul derive the nonce from their
/// inputs so evaluation is deterministic.
class TransparentSwhe final : public SwheBackend {
 public:
  static constexpr std::size_t kHeaderBytes = 16;

  explicit TransparentSwhe(std::size_t z_bits = 2048);

  std::string_view name() const override { return "transparent"; }
  std::size_t ciphertext_bits() const override { return z_bits_; }
  std::size_t message_bits() const override { return z_bits_ - 8 * kHeaderBytes; }

  SwheKeyPair keygen(std::size_t lambda_bits) const override;
  SwheCiphertext encrypt(const SwhePublicKey& pk, const mpz_class& m) const override;
  SwheCiphertext add(const SwheCiphertext& a, const SwheCiphertext& b) const override;
  SwheCiphertext mul(const SwheCiphertext& a, const SwheCiphertext& b) const override;
  mpz_class decrypt(const SwheSecretKey& sk, const SwheCiphertext& c) const override;

 private:
  SwheCiphertext pack(Level level, ByteView nonce, const mpz_class& m) const;
  mpz_class message(const SwheCiphertext& c) const;
  void check_width(const SwheCiphertext& c) const;

  std::size_t z_bits_;
};

/// Smallest ciphertext width (multiple of 256 bits, at least 2048) whose
/// message field holds 2^(2N + 20): room for |Y| < 2^20 summed products of
/// 2^(N - d) encodings.
std::size_t swhe_bits_for(std::uint32_t N);

}  // namespace connor::crypto
