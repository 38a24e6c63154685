#include "connor/keystore.hpp"

namespace connor {

Bytes serialize_keystore(const Keystore& ks) {
  ByteWriter w;
  w.put("CNK1");
  w.put(ks.keys.K.bytes);
  w.put_le(ks.keys.swhe.pk.blob.size(), 4);
  w.put(ks.keys.swhe.pk.blob);
  w.put_le(ks.keys.swhe.sk.blob.size(), 4);
  w.put(ks.keys.swhe.sk.blob);
  w.put_le(ks.phi, 8);
  w.put_le(ks.B, 4);
  w.put_le(ks.N, 4);
  w.put_le(ks.z_bits, 4);
  return w.take();
}

Keystore deserialize_keystore(ByteView bytes) {
  ByteReader r(bytes);
  r.expect_magic("CNK1");
  Keystore ks;
  ks.keys.K.bytes = r.array<16>();
  auto pk = r.take(r.le(4));
  ks.keys.swhe.pk.blob.assign(pk.begin(), pk.end());
  auto sk = r.take(r.le(4));
  ks.keys.swhe.sk.blob.assign(sk.begin(), sk.end());
  ks.phi = r.le(8);
  ks.B = static_cast<std::uint32_t>(r.le(4));
  ks.N = static_cast<std::uint32_t>(r.le(4));
  ks.z_bits = static_cast<std::uint32_t>(r.le(4));
  if (!r.done()) throw FormatError("trailing bytes after keystore");
  if (ks.N != 2 * ks.B + 1) throw FormatError("keystore N does not match B");
  return ks;
}

}  // namespace connor
