#pragma once

#include <cstdint>
#include <vector>

#include "connor/common.hpp"
#include "connor/crypto.hpp"

namespace connor {

inline constexpr int kMaxTreeDepth = 8;
inline constexpr int kDefaultTreeDepth = 6;

enum class CompareOutcome { kGreater, kLessEq, kUncertain };

const char* to_string(CompareOutcome o);

/// Complete binary tree of ORE-encrypted fractions of an amplified budget.
///
/// `nodes` is in level order. The node at level L, position p sits at in-order
/// position j = (2p+1) * 2^(depth-L-1) and encrypts floor(j * theta_amp / 2^depth).
struct CostTree {
  int depth = 0;
  std::vector<crypto::OreCiphertext> nodes;

  friend bool operator==(const CostTree&, const CostTree&) = default;
};

/// floor(j * theta_amp / 2^depth) without overflow.
std::uint64_t tree_boundary(std::uint64_t theta_amp, int depth, std::uint64_t j);

/// In-order position of level-order node i in a tree of the given depth.
std::uint64_t inorder_position(std::size_t i, int depth);

CostTree build_tree(const crypto::OreKey& key, std::uint64_t theta_amp, int depth);

/// Walks from the root: greater than the node goes right (bit 1), otherwise
/// left (bit 0). The result has `tree.depth` bits, first decision highest.
std::uint32_t path_code(const CostTree& tree, const crypto::OreCiphertext& ex);

/// Greater when cx + cy >= 2^beta, LessEq when <= 2^beta - 2, otherwise Uncertain.
CompareOutcome compare_codes(std::uint32_t cx, std::uint32_t cy, int beta);

CompareOutcome compare_sum(const CostTree& tree, const crypto::OreCiphertext& ex,
                           const crypto::OreCiphertext& ey);

/// 1 byte depth, then the level-order node ciphertexts.
void write_tree(ByteWriter& w, const CostTree& tree);
CostTree read_tree(ByteReader& r);

}  // namespace connor
