#pragma once

#include <cstdint>

#include "connor/secure_index.hpp"

namespace connor {

/// Client-side secrets and the parameters needed to issue tokens and decode
/// results. Never shipped to the server.
struct Keystore {
  ClientKeys keys;
  std::uint64_t phi = 0;
  std::uint32_t B = 0;
  std::uint32_t N = 0;
  std::uint32_t z_bits = 0;

  friend bool operator==(const Keystore& a, const Keystore& b) {
    return a.keys.K == b.keys.K && a.keys.swhe.pk.blob == b.keys.swhe.pk.blob &&
           a.keys.swhe.sk.blob == b.keys.swhe.sk.blob && a.phi == b.phi && a.B == b.B && a.N == b.N &&
           a.z_bits == b.z_bits;
  }
};

/// `CNK1`, little-endian: K, u32-length-prefixed pk and sk blobs, u64 phi,
/// u32 B, u32 N, u32 z.
Bytes serialize_keystore(const Keystore& ks);
Keystore deserialize_keystore(ByteView bytes);

}  // namespace connor
