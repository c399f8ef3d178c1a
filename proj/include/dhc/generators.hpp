#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "dhc/grid_set.hpp"

namespace dhc {

// How a set was produced; serialized alongside the cells so every artifact
// can be regenerated from its description alone.
struct GeneratorInfo {
  std::string name;
  std::map<std::string, double> params;  // ordered for deterministic output
  std::optional<std::uint64_t> seed;
};

struct NamedSet {
  GridSet set;
  GeneratorInfo info;
};

// Full unit cube at the given resolution.
NamedSet gen_full_cube(int dim, int depth);

// t-th iterate of the IFS {x/4, 3/4 + x/4} on [0,1]: 2^t intervals of length
// 4^-t at depth K = 2t. Dyadic-aligned Cantor-type dust of dimension 1/2.
NamedSet gen_cantor_base4(int t);

// Blocks of Cantor dust accumulating at 1: block m in 1..j_max occupies
// [1-2^(1-m), 1-2^-m] and carries 2^m teeth at spacing 4^-m, each tooth a
// middle-third Cantor set scaled to width 2^-m 9^-m. Cells sample the teeth
// half-open (occupied iff [c h, (c+1) h) meets a tooth), so boundary points
// land in one cell and the union of occupied cells still covers the teeth.
// Depth K(j_max) = min(cap, ceil(j_max + (2 j_max + 1) log2 3) + 1) leaves
// at least one ternary level of the finest teeth resolved below the cap.
NamedSet gen_dust_comb(int j_max);

// Same block layout with solid teeth: block m carries 2^m closed intervals
// [A_i, A_i + 4^-m/10] at spacing 4^-m. Tooth starts are cell-aligned for
// depth >= 2 j_max + 6, so occupied cells are computed exactly.
NamedSet gen_interval_comb(int j_max, int depth);
int interval_comb_default_depth(int j_max);

// Fractal percolation: every depth-1 cell survives with probability p,
// recursing into survivors down to the leaf depth. Survival draws are
// counter-addressed by (seed, depth, corner), so the output is a pure
// function of (dim, depth, p, seed).
NamedSet gen_percolation(int dim, int depth, double p, std::uint64_t seed);

// Dispatch by stored description (for corpus rebuilds and the CLI).
NamedSet generate(const GeneratorInfo& info);

int dust_comb_depth(int j_max);

}  // namespace dhc
