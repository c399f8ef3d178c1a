#pragma once

#include <vector>

#include "dhc/grid_set.hpp"
#include "dhc/util.hpp"

namespace test_support {

// Counter-addressed random cell list, stable across runs and platforms.
inline std::vector<dhc::Corner> random_cells(int dim, int depth, double fill,
                                             std::uint64_t seed) {
  std::vector<dhc::Corner> out;
  std::int64_t n = std::int64_t(1) << depth;
  std::uint64_t ctr = 0;
  dhc::Corner c{};
  while (true) {
    if (dhc::uniform01(dhc::mix_key(seed, ctr++)) < fill) out.push_back(c);
    int axis = 0;
    while (axis < dim && ++c[axis] == n) {
      c[axis] = 0;
      ++axis;
    }
    if (axis == dim) break;
  }
  return out;
}

inline dhc::GridSet random_set(int dim, int depth, double fill, std::uint64_t seed) {
  return dhc::GridSet::from_cells(dim, depth, random_cells(dim, depth, fill, seed));
}

}  // namespace test_support
