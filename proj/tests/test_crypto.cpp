#include <gtest/gtest.h>

#include <cstring>
#include <optional>

#include <bit>
#include <random>
#include <set>
#include <unordered_set>

#include "connor/crypto.hpp"
#include "connor/swhe.hpp"

using namespace connor;
using namespace connor::crypto;

namespace {

PrfKey fixed_key(std::uint8_t seed) {
  PrfKey k;
  for (std::size_t i = 0; i < k.bytes.size(); ++i) k.bytes[i] = static_cast<std::uint8_t>(seed * 31 + i);
  return k;
}

struct LabelHash {
  std::size_t operator()(const Label16& l) const {
    std::size_t h;
    std::memcpy(&h, l.data(), sizeof h);
    return h;
  }
};

std::size_t hamming(ByteView a, ByteView b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::popcount(static_cast<unsigned>(a[i] ^ b[i]));
  return d;
}

int sign(std::uint64_t a, std::uint64_t b) { return a < b ? -1 : a > b ? 1 : 0; }
int sign(Order o) { return o == Order::kLess ? -1 : o == Order::kGreater ? 1 : 0; }

}  // namespace

TEST(PrfH, DeterministicAndSixteenBytes) {
  const PrfKey k = fixed_key(1);
  const Label16 a = prf_h(k.bytes, tagged("u", 1));
  EXPECT_EQ(a, prf_h(k.bytes, tagged("u", 1)));
  EXPECT_NE(a, prf_h(k.bytes, tagged("u", 2)));
  EXPECT_NE(a, prf_h(fixed_key(2).bytes, tagged("u", 1)));
  EXPECT_EQ(sizeof(a), 16u);
}

TEST(PrfH, MatchesHmacSha256Prefix) {
  // RFC 4231 test case 2.
  const std::string key = "Jefe";
  HmacSha256 mac(as_bytes(key));
  const auto full = mac.mac(as_bytes("what do ya want for nothing?"));
  EXPECT_EQ(to_hex(full), "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
  // Split input gives the same MAC as the concatenation.
  EXPECT_EQ(mac.mac(as_bytes("what do ya "), as_bytes("want for nothing?")), full);
}

TEST(PrfH, NoCollisionsOverAMillionLabels) {
  const PrfKey k = fixed_key(3);
  std::unordered_set<Label16, LabelHash> seen;
  seen.reserve(1'000'000);
  const std::size_t vertices = 200'000;
  for (std::size_t v = 0; v < vertices; ++v)
    for (std::uint8_t tag = 0; tag < 5; ++tag) ASSERT_TRUE(seen.insert(prf_h(k.bytes, tagged(std::to_string(v), tag))).second);
  EXPECT_EQ(seen.size(), 1'000'000u);
}

TEST(PrfG, WidthAndDeterminism) {
  const PrfKey k = fixed_key(4);
  const auto ctr = counter_bytes(7);
  for (std::size_t bits : {8u, 256u, 264u, 2304u, 6656u}) {
    Bytes out = prf_g(k.bytes, ctr, bits);
    EXPECT_EQ(out.size() * 8, bits);
    EXPECT_EQ(out, prf_g(k.bytes, ctr, bits));
  }
  // Shorter outputs are prefixes of longer ones.
  Bytes a = prf_g(k.bytes, ctr, 256), b = prf_g(k.bytes, ctr, 2304);
  EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  EXPECT_THROW(prf_g(k.bytes, ctr, 12), CryptoError);
  // Caller-held state variant agrees.
  HmacSha256 mac(k.bytes);
  Bytes c(288);
  prf_g(mac, ctr, c);
  EXPECT_EQ(c, b);
}

TEST(PrfG, AdjacentCountersLookUnrelated) {
  const std::size_t bits = kLambdaBits + 2048 + kOreBits;
  double total = 0;
  const int pairs = 10'000;
  for (int i = 0; i < pairs; ++i) {
    const Label16 key = prf_h(fixed_key(5).bytes, counter_bytes(i));
    const Bytes p0 = prf_g(key, counter_bytes(0), bits);
    const Bytes p1 = prf_g(key, counter_bytes(1), bits);
    const double frac = static_cast<double>(hamming(p0, p1)) / bits;
    ASSERT_GT(frac, 0.4);
    ASSERT_LT(frac, 0.6);
    total += frac;
  }
  // Mean of 10^4 * 2304 fair bits: sd about 1e-4.
  EXPECT_NEAR(total / pairs, 0.5, 0.001);
}

TEST(CounterBytes, BigEndian) {
  const auto b = counter_bytes(0x0102030405060708ull);
  EXPECT_EQ(to_hex(b), "0102030405060708");
  EXPECT_EQ(to_hex(counter_bytes(0)), "0000000000000000");
}

TEST(Tagged, AppendsOneByte) {
  const Bytes t = tagged("ab", 4);
  EXPECT_EQ(t, (Bytes{'a', 'b', 4}));
}

TEST(RandomKey, Distinct) {
  EXPECT_NE(PrfKey::random(), PrfKey::random());
}

TEST(Ore, Examples) {
  const PrfKey k = fixed_key(6);
  EXPECT_EQ(ore_compare(ore_encrypt(k, 3), ore_encrypt(k, 7)), Order::kLess);
  EXPECT_EQ(ore_compare(ore_encrypt(k, 7), ore_encrypt(k, 3)), Order::kGreater);
  EXPECT_EQ(ore_compare(ore_encrypt(k, 5), ore_encrypt(k, 5)), Order::kEqual);
  EXPECT_EQ(ore_compare(ore_encrypt(k, 0), ore_encrypt(k, ~std::uint64_t{0})), Order::kLess);
  const auto c = ore_encrypt(k, 12345);
  EXPECT_EQ(ore_compare(c, c), Order::kEqual);
  EXPECT_EQ(c.size() * 8, kOreBits);
}

TEST(Ore, ExhaustiveTenBitDomain) {
  const OreKey key(fixed_key(7));
  std::vector<OreCiphertext> ct(1024);
  for (std::uint64_t m = 0; m < 1024; ++m) ct[m] = key.encrypt(m);
  for (std::uint64_t a = 0; a < 1024; ++a)
    for (std::uint64_t b = 0; b < 1024; ++b) ASSERT_EQ(sign(ore_compare(ct[a], ct[b])), sign(a, b)) << a << " " << b;
}

TEST(Ore, RandomSixtyFourBitPairs) {
  const OreKey key(fixed_key(8));
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100'000; ++i) {
    std::uint64_t a = rng(), b = rng();
    // Exercise long shared prefixes too.
    if (i % 4 == 0) b = a ^ (std::uint64_t{1} << (rng() % 64));
    if (i % 50 == 0) b = a;
    ASSERT_EQ(sign(ore_compare(key.encrypt(a), key.encrypt(b))), sign(a, b));
  }
}

TEST(Ore, DeterministicAndKeyed) {
  const PrfKey k1 = fixed_key(9), k2 = fixed_key(10);
  EXPECT_EQ(ore_encrypt(k1, 99), ore_encrypt(k1, 99));
  EXPECT_NE(ore_encrypt(k1, 99), ore_encrypt(k2, 99));
}

TEST(Ore, ClientInversion) {
  const OreKey key(fixed_key(11));
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t m = rng();
    EXPECT_EQ(key.decrypt(key.encrypt(m)), m);
  }
  OreCiphertext bad{};
  bad.fill(0xff);
  EXPECT_THROW(key.decrypt(bad), CryptoError);
}

TEST(Ore, WidthMismatch) {
  const auto c = ore_encrypt(fixed_key(12), 1);
  Bytes shorter(c.begin(), c.end() - 1);
  EXPECT_THROW(ore_compare(ByteView(c), ByteView(shorter)), FormatError);
  EXPECT_EQ(ore_compare(ByteView(c), ByteView(c)), Order::kEqual);
}

class Swhe : public ::testing::Test {
 protected:
  TransparentSwhe be{2048};
  SwheKeyPair kp = be.keygen(128);
  SwheCiphertext enc(const mpz_class& m) const { return be.encrypt(kp.pk, m); }
  mpz_class dec(const SwheCiphertext& c) const { return be.decrypt(kp.sk, c); }
};

TEST_F(Swhe, Examples) {
  EXPECT_EQ(dec(be.add(enc(5), enc(9))), 14);
  EXPECT_EQ(dec(be.mul(enc(6), enc(7))), 42);
  const mpz_class two = 2;
  mpz_class p8, p7, p5, p4, want;
  mpz_ui_pow_ui(p8.get_mpz_t(), 2, 8);
  mpz_ui_pow_ui(p7.get_mpz_t(), 2, 7);
  mpz_ui_pow_ui(p5.get_mpz_t(), 2, 5);
  mpz_ui_pow_ui(p4.get_mpz_t(), 2, 4);
  want = (mpz_class(1) << 15) + (mpz_class(1) << 9);
  EXPECT_EQ(dec(be.add(be.mul(enc(p8), enc(p7)), be.mul(enc(p5), enc(p4)))), want);
}

TEST_F(Swhe, WidthAndLevels) {
  const auto c = enc(123);
  EXPECT_EQ(c.bytes.size() * 8, 2048u);
  EXPECT_EQ(c.level(), Level::kFresh);
  const auto p = be.mul(c, c);
  EXPECT_EQ(p.level(), Level::kProduct);
  EXPECT_EQ(p.bytes.size() * 8, 2048u);
  EXPECT_THROW(be.mul(p, c), CryptoError);
  EXPECT_THROW(be.mul(c, p), CryptoError);
  EXPECT_THROW(be.add(p, c), CryptoError);
  EXPECT_EQ(be.add(p, p).level(), Level::kProduct);
  EXPECT_EQ(be.message_bits(), 2048u - 128u);
}

TEST_F(Swhe, RandomizedEncryption) {
  const auto a = enc(77), b = enc(77);
  EXPECT_NE(a, b);
  EXPECT_EQ(dec(a), dec(b));
}

TEST_F(Swhe, MessageSpaceAndWidthErrors) {
  EXPECT_THROW(enc(mpz_class(1) << 1920), CryptoError);
  EXPECT_NO_THROW(enc((mpz_class(1) << 1920) - 1));
  EXPECT_THROW(enc(-1), CryptoError);
  TransparentSwhe wide(4096);
  const auto w = wide.encrypt(kp.pk, 3);
  EXPECT_THROW(be.add(w, enc(3)), FormatError);
  EXPECT_THROW(dec(w), FormatError);
  EXPECT_THROW(TransparentSwhe(100), CryptoError);
}

TEST_F(Swhe, ContractOnRandomTriples) {
  gmp_randclass r(gmp_randinit_mt);
  r.seed(13);
  for (int i = 0; i < 10'000; ++i) {
    const mpz_class a = r.get_z_bits(400), b = r.get_z_bits(400), c = r.get_z_bits(400);
    const auto ea = enc(a), eb = enc(b), ec = enc(c);
    ASSERT_EQ(dec(be.add(ea, eb)), a + b);
    ASSERT_EQ(dec(be.add(be.add(ea, eb), ec)), a + b + c);
    ASSERT_EQ(dec(be.mul(ea, eb)), a * b);
    ASSERT_EQ(dec(be.add(be.mul(ea, eb), be.mul(ea, ec))), a * (b + c));
  }
}

TEST_F(Swhe, SumOfProducts) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 64);
    mpz_class want = 0;
    std::optional<SwheCiphertext> acc;
    for (int i = 0; i < k; ++i) {
      const mpz_class a = mpz_class(1) << (rng() % 300), b = mpz_class(1) << (rng() % 300);
      want += a * b;
      const auto p = be.mul(enc(a), enc(b));
      acc = acc ? be.add(*acc, p) : p;
    }
    ASSERT_EQ(dec(*acc), want);
  }
}

TEST_F(Swhe, EvaluationIsDeterministic) {
  const auto a = enc(3), b = enc(4);
  EXPECT_EQ(be.mul(a, b), be.mul(a, b));
  EXPECT_EQ(be.add(a, b), be.add(a, b));
}

TEST(SwheSizing, BitsFor) {
  EXPECT_EQ(swhe_bits_for(1), 2048u);
  for (std::uint32_t N : {1u, 100u, 949u, 1000u, 3000u}) {
    const std::size_t z = swhe_bits_for(N);
    EXPECT_EQ(z % 256, 0u);
    EXPECT_GE(z, 2048u);
    EXPECT_GE(TransparentSwhe(z).message_bits(), 2 * std::size_t{N} + 21);
    if (z > 2048) EXPECT_LT(TransparentSwhe(z - 256).message_bits(), 2 * std::size_t{N} + 21);
  }
}

TEST(SwheKeys, KeygenRejectsOtherLambda) {
  TransparentSwhe be;
  EXPECT_THROW(be.keygen(64), CryptoError);
  EXPECT_NE(be.keygen(128).sk.blob, be.keygen(128).sk.blob);
}
