#include "connor/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <cstring>

namespace connor::crypto {

namespace {

EVP_MD_CTX* new_ctx() {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw CryptoError("EVP_MD_CTX_new failed");
  return ctx;
}

// Scratch context per thread for finishing a MAC from a precomputed state.
EVP_MD_CTX* scratch() {
  struct Holder {
    EVP_MD_CTX* ctx = new_ctx();
    ~Holder() { EVP_MD_CTX_free(ctx); }
  };
  thread_local Holder h;
  return h.ctx;
}

void check(int ok, const char* what) {
  if (ok != 1) throw CryptoError(std::string(what) + " failed");
}

}  // namespace

void HmacSha256::CtxDeleter::operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }

HmacSha256::HmacSha256(ByteView key) : inner_(new_ctx()), outer_(new_ctx()) {
  std::array<std::uint8_t, 64> block{};
  if (key.size() > block.size()) {
    unsigned len = 0;
    check(EVP_Digest(key.data(), key.size(), block.data(), &len, EVP_sha256(), nullptr), "EVP_Digest");
  } else {
    std::memcpy(block.data(), key.data(), key.size());
  }
  std::array<std::uint8_t, 64> ipad, opad;
  for (std::size_t i = 0; i < block.size(); ++i) {
    ipad[i] = block[i] ^ 0x36;
    opad[i] = block[i] ^ 0x5c;
  }
  check(EVP_DigestInit_ex(inner_.get(), EVP_sha256(), nullptr), "EVP_DigestInit_ex");
  check(EVP_DigestUpdate(inner_.get(), ipad.data(), ipad.size()), "EVP_DigestUpdate");
  check(EVP_DigestInit_ex(outer_.get(), EVP_sha256(), nullptr), "EVP_DigestInit_ex");
  check(EVP_DigestUpdate(outer_.get(), opad.data(), opad.size()), "EVP_DigestUpdate");
}

HmacSha256::HmacSha256(const HmacSha256& other) : inner_(new_ctx()), outer_(new_ctx()) {
  check(EVP_MD_CTX_copy_ex(inner_.get(), other.inner_.get()), "EVP_MD_CTX_copy_ex");
  check(EVP_MD_CTX_copy_ex(outer_.get(), other.outer_.get()), "EVP_MD_CTX_copy_ex");
}

HmacSha256& HmacSha256::operator=(const HmacSha256& other) {
  if (this != &other) *this = HmacSha256(other);
  return *this;
}

HmacSha256::~HmacSha256() = default;

std::array<std::uint8_t, 32> HmacSha256::mac(ByteView msg) const { return mac(msg, {}); }

std::array<std::uint8_t, 32> HmacSha256::mac(ByteView a, ByteView b) const {
  EVP_MD_CTX* work = scratch();
  std::array<std::uint8_t, 32> inner_hash, out;
  unsigned len = 0;
  check(EVP_MD_CTX_copy_ex(work, inner_.get()), "EVP_MD_CTX_copy_ex");
  check(EVP_DigestUpdate(work, a.data(), a.size()), "EVP_DigestUpdate");
  if (!b.empty()) check(EVP_DigestUpdate(work, b.data(), b.size()), "EVP_DigestUpdate");
  check(EVP_DigestFinal_ex(work, inner_hash.data(), &len), "EVP_DigestFinal_ex");
  check(EVP_MD_CTX_copy_ex(work, outer_.get()), "EVP_MD_CTX_copy_ex");
  check(EVP_DigestUpdate(work, inner_hash.data(), inner_hash.size()), "EVP_DigestUpdate");
  check(EVP_DigestFinal_ex(work, out.data(), &len), "EVP_DigestFinal_ex");
  return out;
}

void random_bytes(std::span<std::uint8_t> out) {
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) throw CryptoError("RAND_bytes failed");
}

PrfKey PrfKey::random() {
  PrfKey k;
  random_bytes(k.bytes);
  return k;
}

Label16 prf_h(const Label16& key, ByteView msg) {
  auto full = HmacSha256(key).mac(msg);
  Label16 out;
  std::memcpy(out.data(), full.data(), out.size());
  return out;
}

void prf_g(const HmacSha256& mac, ByteView msg, std::span<std::uint8_t> out) {
  std::size_t pos = 0;
  for (std::uint32_t block = 0; pos < out.size(); ++block) {
    const std::array<std::uint8_t, 4> ctr{static_cast<std::uint8_t>(block >> 24),
                                          static_cast<std::uint8_t>(block >> 16),
                                          static_cast<std::uint8_t>(block >> 8),
                                          static_cast<std::uint8_t>(block)};
    auto chunk = mac.mac(msg, ctr);
    const std::size_t n = std::min(chunk.size(), out.size() - pos);
    std::memcpy(out.data() + pos, chunk.data(), n);
    pos += n;
  }
}

Bytes prf_g(const Label16& key, ByteView msg, std::size_t out_bits) {
  if (out_bits % 8 != 0) throw CryptoError("g output width must be a whole number of bytes");
  Bytes out(out_bits / 8);
  prf_g(HmacSha256(key), msg, out);
  return out;
}

Bytes tagged(std::string_view label, std::uint8_t tag) {
  Bytes b(label.begin(), label.end());
  b.push_back(tag);
  return b;
}

std::array<std::uint8_t, 8> counter_bytes(std::uint64_t omega) {
  std::array<std::uint8_t, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(omega >> (56 - 8 * i));
  return b;
}

// ---------------------------------------------------------------------------

OreKey::OreKey(const PrfKey& key) : prf_(key.bytes) {}

std::uint8_t OreKey::digit_pad(int i, std::uint64_t prefix) const {
  std::array<std::uint8_t, 9> msg;
  msg[0] = static_cast<std::uint8_t>(i);
  for (int b = 0; b < 8; ++b) msg[1 + b] = static_cast<std::uint8_t>(prefix >> (56 - 8 * b));
  auto out = prf_.mac(msg);
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v = (v << 8) | out[b];
  return static_cast<std::uint8_t>(v % 3);
}

namespace {

// Digit i (0 = most significant bit) lives in bits 7-6 of byte i/4 for i%4==0, etc.
void put_digit(OreCiphertext& ct, int i, std::uint8_t d) {
  ct[i / 4] |= static_cast<std::uint8_t>(d << (6 - 2 * (i % 4)));
}

std::uint8_t get_digit(const OreCiphertext& ct, int i) { return (ct[i / 4] >> (6 - 2 * (i % 4))) & 3; }

}  // namespace

OreCiphertext OreKey::encrypt(std::uint64_t m) const {
  OreCiphertext ct{};
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t prefix = i == 0 ? 0 : (m >> (64 - i)) << (64 - i);
    const std::uint8_t bit = (m >> (63 - i)) & 1;
    put_digit(ct, i, static_cast<std::uint8_t>((digit_pad(i, prefix) + bit) % 3));
  }
  return ct;
}

std::uint64_t OreKey::decrypt(const OreCiphertext& ct) const {
  std::uint64_t m = 0;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t prefix = i == 0 ? 0 : (m >> (64 - i)) << (64 - i);
    const std::uint8_t bit = static_cast<std::uint8_t>((get_digit(ct, i) + 3 - digit_pad(i, prefix)) % 3);
    if (bit > 1) throw CryptoError("ORE ciphertext does not decrypt under this key");
    m |= std::uint64_t{bit} << (63 - i);
  }
  return m;
}

OreCiphertext ore_encrypt(const PrfKey& key, std::uint64_t m) { return OreKey(key).encrypt(m); }

Order ore_compare(const OreCiphertext& a, const OreCiphertext& b) {
  for (std::size_t byte = 0; byte < a.size(); ++byte) {
    if (a[byte] == b[byte]) continue;
    for (int i = static_cast<int>(byte) * 4; i < static_cast<int>(byte) * 4 + 4; ++i) {
      const std::uint8_t x = get_digit(a, i), y = get_digit(b, i);
      if (x == y) continue;
      return x == (y + 1) % 3 ? Order::kGreater : Order::kLess;
    }
  }
  return Order::kEqual;
}

Order ore_compare(ByteView a, ByteView b) {
  if (a.size() != kOreBits / 8 || b.size() != kOreBits / 8)
    throw FormatError("ORE ciphertext width mismatch");
  OreCiphertext x, y;
  std::memcpy(x.data(), a.data(), x.size());
  std::memcpy(y.data(), b.data(), y.size());
  return ore_compare(x, y);
}

}  // namespace connor::crypto
