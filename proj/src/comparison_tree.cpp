#include "connor/comparison_tree.hpp"

#include <bit>

namespace connor {

const char* to_string(CompareOutcome o) {
  switch (o) {
    case CompareOutcome::kGreater: return "greater";
    case CompareOutcome::kLessEq: return "less-eq";
    case CompareOutcome::kUncertain: return "uncertain";
  }
  return "?";
}

namespace {

void check_depth(int depth) {
  if (depth < 1 || depth > kMaxTreeDepth)
    throw Error("tree depth must be in [1, " + std::to_string(kMaxTreeDepth) + "], got " + std::to_string(depth));
}

}  // namespace

std::uint64_t tree_boundary(std::uint64_t theta_amp, int depth, std::uint64_t j) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(j) * theta_amp) >> depth);
}

std::uint64_t inorder_position(std::size_t i, int depth) {
  const int level = std::bit_width(i + 1) - 1;
  const std::uint64_t p = i + 1 - (std::size_t{1} << level);
  return (2 * p + 1) << (depth - level - 1);
}

CostTree build_tree(const crypto::OreKey& key, std::uint64_t theta_amp, int depth) {
  check_depth(depth);
  CostTree t;
  t.depth = depth;
  t.nodes.resize((std::size_t{1} << depth) - 1);
  for (std::size_t i = 0; i < t.nodes.size(); ++i)
    t.nodes[i] = key.encrypt(tree_boundary(theta_amp, depth, inorder_position(i, depth)));
  return t;
}

std::uint32_t path_code(const CostTree& tree, const crypto::OreCiphertext& ex) {
  std::uint32_t code = 0;
  std::size_t i = 0;
  for (int level = 0; level < tree.depth; ++level) {
    const bool right = crypto::ore_compare(ex, tree.nodes[i]) == crypto::Order::kGreater;
    code = (code << 1) | (right ? 1u : 0u);
    i = 2 * i + (right ? 2 : 1);
  }
  return code;
}

CompareOutcome compare_codes(std::uint32_t cx, std::uint32_t cy, int beta) {
  const std::uint64_t sum = std::uint64_t{cx} + cy;
  const std::uint64_t full = std::uint64_t{1} << beta;
  if (sum >= full) return CompareOutcome::kGreater;
  if (sum + 2 <= full) return CompareOutcome::kLessEq;
  return CompareOutcome::kUncertain;
}

CompareOutcome compare_sum(const CostTree& tree, const crypto::OreCiphertext& ex, const crypto::OreCiphertext& ey) {
  return compare_codes(path_code(tree, ex), path_code(tree, ey), tree.depth);
}

void write_tree(ByteWriter& w, const CostTree& tree) {
  check_depth(tree.depth);
  if (tree.nodes.size() != (std::size_t{1} << tree.depth) - 1) throw FormatError("tree node count mismatch");
  w.put_u8(static_cast<std::uint8_t>(tree.depth));
  for (const auto& n : tree.nodes) w.put(n);
}

CostTree read_tree(ByteReader& r) {
  CostTree t;
  t.depth = r.u8();
  if (t.depth < 1 || t.depth > kMaxTreeDepth) throw FormatError("tree depth out of range");
  t.nodes.resize((std::size_t{1} << t.depth) - 1);
  for (auto& n : t.nodes) n = r.array<crypto::kOreBits / 8>();
  return t;
}

}  // namespace connor
