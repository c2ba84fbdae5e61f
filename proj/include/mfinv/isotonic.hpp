#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfinv/error.hpp"

namespace mfinv {

/// Weighted least-squares nondecreasing fit by pool-adjacent-violators.
/// Already-monotone input is returned unchanged, bit for bit.
template <class T>
std::vector<T> isotonic_increasing(std::span<const T> y, std::span<const T> w = {}) {
  if (!w.empty() && w.size() != y.size()) {
    throw ValidationError("isotonic_increasing: weight count mismatch");
  }
  struct Block {
    T value;
    T weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    blocks.push_back({y[i], w.empty() ? T(1) : w[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].value > blocks.back().value) {
      const Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      const T wsum = a.weight + b.weight;
      a.value = (a.value * a.weight + b.value * b.weight) / wsum;
      a.weight = wsum;
      a.count += b.count;
    }
  }
  std::vector<T> out;
  out.reserve(y.size());
  for (const Block& b : blocks) out.insert(out.end(), b.count, b.value);
  return out;
}

}  // namespace mfinv
