#include "connor/swhe.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstring>

#include "connor/crypto.hpp"

namespace connor::crypto {

Level SwheCiphertext::level() const {
  if (bytes.empty()) throw FormatError("empty SWHE ciphertext");
  if (bytes[0] != static_cast<std::uint8_t>(Level::kFresh) && bytes[0] != static_cast<std::uint8_t>(Level::kProduct))
    throw FormatError("unknown SWHE ciphertext level");
  return static_cast<Level>(bytes[0]);
}

TransparentSwhe::TransparentSwhe(std::size_t z_bits) : z_bits_(z_bits) {
  if (z_bits % 8 != 0 || z_bits <= 8 * kHeaderBytes)
    throw CryptoError("SWHE width must be a whole number of bytes above the header");
}

SwheKeyPair TransparentSwhe::keygen(std::size_t lambda_bits) const {
  if (lambda_bits != kLambdaBits) throw CryptoError("only lambda = 128 is supported");
  // Key material is a width tag plus a random identifier; there is no secret.
  ByteWriter w;
  w.put("TSW1");
  w.put_le(z_bits_, 4);
  Label16 id;
  random_bytes(id);
  w.put(id);
  Bytes blob = w.take();
  return {{blob}, {blob}};
}

SwheCiphertext TransparentSwhe::pack(Level level, ByteView nonce, const mpz_class& m) const {
  if (m < 0) throw CryptoError("SWHE messages are non-negative");
  if (mpz_sizeinbase(m.get_mpz_t(), 2) > message_bits() && m != 0)
    throw CryptoError("SWHE message exceeds the " + std::to_string(message_bits()) + "-bit message field");
  SwheCiphertext c;
  c.bytes.assign(z_bits_ / 8, 0);
  c.bytes[0] = static_cast<std::uint8_t>(level);
  std::memcpy(c.bytes.data() + 1, nonce.data(), kHeaderBytes - 1);
  std::size_t count = 0;
  const std::size_t field = c.bytes.size() - kHeaderBytes;
  std::vector<std::uint8_t> tmp((mpz_sizeinbase(m.get_mpz_t(), 2) + 7) / 8 + 1);
  mpz_export(tmp.data(), &count, 1, 1, 1, 0, m.get_mpz_t());
  std::memcpy(c.bytes.data() + kHeaderBytes + (field - count), tmp.data(), count);
  return c;
}

mpz_class TransparentSwhe::message(const SwheCiphertext& c) const {
  mpz_class m;
  mpz_import(m.get_mpz_t(), c.bytes.size() - kHeaderBytes, 1, 1, 1, 0, c.bytes.data() + kHeaderBytes);
  return m;
}

void TransparentSwhe::check_width(const SwheCiphertext& c) const {
  if (c.bytes.size() * 8 != z_bits_) throw FormatError("SWHE ciphertext width mismatch");
}

SwheCiphertext TransparentSwhe::encrypt(const SwhePublicKey&, const mpz_class& m) const {
  std::array<std::uint8_t, kHeaderBytes - 1> nonce;
  random_bytes(nonce);
  return pack(Level::kFresh, nonce, m);
}

namespace {

std::array<std::uint8_t, TransparentSwhe::kHeaderBytes - 1> derive_nonce(std::uint8_t op, const SwheCiphertext& a,
                                                                          const SwheCiphertext& b) {
  std::array<std::uint8_t, 1 + 2 * (TransparentSwhe::kHeaderBytes - 1)> in;
  in[0] = op;
  std::memcpy(in.data() + 1, a.bytes.data() + 1, TransparentSwhe::kHeaderBytes - 1);
  std::memcpy(in.data() + TransparentSwhe::kHeaderBytes, b.bytes.data() + 1, TransparentSwhe::kHeaderBytes - 1);
  std::array<std::uint8_t, 32> digest;
  unsigned len = 0;
  if (EVP_Digest(in.data(), in.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw CryptoError("EVP_Digest failed");
  std::array<std::uint8_t, TransparentSwhe::kHeaderBytes - 1> nonce;
  std::memcpy(nonce.data(), digest.data(), nonce.size());
  return nonce;
}

}  // namespace

SwheCiphertext TransparentSwhe::add(const SwheCiphertext& a, const SwheCiphertext& b) const {
  check_width(a);
  check_width(b);
  if (a.level() != b.level()) throw CryptoError("SWHE add requires operands of the same level");
  return pack(a.level(), derive_nonce('+', a, b), message(a) + message(b));
}

SwheCiphertext TransparentSwhe::mul(const SwheCiphertext& a, const SwheCiphertext& b) const {
  check_width(a);
  check_width(b);
  if (a.level() != Level::kFresh || b.level() != Level::kFresh)
    throw CryptoError("SWHE mul accepts fresh ciphertexts only");
  return pack(Level::kProduct, derive_nonce('*', a, b), message(a) * message(b));
}

mpz_class TransparentSwhe::decrypt(const SwheSecretKey&, const SwheCiphertext& c) const {
  check_width(c);
  c.level();
  return message(c);
}

std::size_t swhe_bits_for(std::uint32_t N) {
  const std::size_t need = 2 * std::size_t{N} + 20 + 1 + 8 * TransparentSwhe::kHeaderBytes;
  const std::size_t z = (need + 255) / 256 * 256;
  return std::max<std::size_t>(z, 2048);
}

}  // namespace connor::crypto
