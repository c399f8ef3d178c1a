#include "dhc/generators.hpp"

#include <cmath>

namespace dhc {

NamedSet gen_full_cube(int dim, int depth) {
  require(depth <= grid_depth_cap(dim), "full_cube: depth beyond the cap for this dimension");
  NamedSet out{GridSet::full_cube(dim, depth),
               {"full_cube", {{"dim", double(dim)}, {"depth", double(depth)}}, {}}};
  return out;
}

NamedSet gen_cantor_base4(int t) {
  require(t >= 1 && 2 * t <= grid_depth_cap(1), "cantor_base4: need 1 <= t <= 12");
  std::vector<Corner> cells;
  cells.reserve(std::size_t(1) << t);
  for (std::uint64_t b = 0; b < (std::uint64_t(1) << t); ++b) {
    std::int64_t m = 0;
    for (int i = 0; i < t; ++i)
      m += (((b >> i) & 1) ? 3ll : 0ll) << (2 * (t - 1 - i));
    cells.push_back({m, 0, 0});
  }
  return {GridSet::from_cells(1, 2 * t, std::move(cells)),
          {"cantor_base4", {{"t", double(t)}}, {}}};
}

namespace {

// Does the middle-third Cantor set meet the half-open [a, b) (fractions over
// den)? Half-open so a point on a cell boundary lands in one cell only and
// teeth do not bleed into the touching cell on their left. Standard gap
// recursion; the interval triples each level, so it terminates once it
// spans [0,1]. Exact integer arithmetic throughout.
bool cantor_meets(__int128 a, __int128 b, __int128 den) {
  if (b <= 0 || a > den) return false;
  if (a >= den) return a == den;
  if (a <= 0) return true;
  return cantor_meets(3 * a, 3 * b, den) || cantor_meets(3 * a - 2 * den, 3 * b - 2 * den, den);
}

}  // namespace

int dust_comb_depth(int j_max) {
  double k = std::ceil(double(j_max) + (2.0 * j_max + 1.0) * std::log2(3.0)) + 1.0;
  return std::min(grid_depth_cap(1), int(k));
}

NamedSet gen_dust_comb(int j_max) {
  require(j_max >= 1 && j_max <= 8, "dust_comb: need 1 <= j_max <= 8");
  const int K = dust_comb_depth(j_max);
  std::vector<Corner> cells;
  for (int m = 1; m <= j_max; ++m) {
    require(K >= 2 * m, "dust_comb: depth cannot align the blocks");
    // tooth scale 2^-m 9^-m, tooth starts ((2^m - 2) 2^m + i) / 4^m
    std::int64_t nine_m = 1;
    for (int i = 0; i < m; ++i) nine_m *= 9;
    std::int64_t scale_inv = (std::int64_t(1) << m) * nine_m;  // 1 / tooth width
    std::int64_t den = std::int64_t(1) << K;
    for (std::int64_t i = 0; i < (std::int64_t(1) << m); ++i) {
      std::int64_t off =
          (((std::int64_t(1) << m) - 2) * (std::int64_t(1) << m) + i) << (K - 2 * m);
      // candidate cells: tooth spans < (2^(K-m)/9^m + 1) cells from off
      std::int64_t span = (std::int64_t(1) << (K - m)) / nine_m + 1;
      for (std::int64_t c = off; c <= off + span; ++c) {
        if (c < 0 || c >= den) continue;
        __int128 lo = __int128(c - off) * scale_inv;
        __int128 hi = __int128(c + 1 - off) * scale_inv;
        if (cantor_meets(lo, hi, __int128(den))) cells.push_back({c, 0, 0});
      }
    }
  }
  return {GridSet::from_cells(1, K, std::move(cells)),
          {"dust_comb", {{"j_max", double(j_max)}}, {}}};
}

int interval_comb_default_depth(int j_max) { return 2 * j_max + 6; }

NamedSet gen_interval_comb(int j_max, int depth) {
  require(j_max >= 1, "interval_comb: need j_max >= 1");
  require(depth >= 2 * j_max + 6, "interval_comb: depth must be at least 2 j_max + 6");
  require(depth <= grid_depth_cap(1), "interval_comb: depth beyond the n=1 cap");
  const int K = depth;
  std::vector<Corner> cells;
  for (int m = 1; m <= j_max; ++m) {
    for (std::int64_t i = 0; i < (std::int64_t(1) << m); ++i) {
      std::int64_t off =
          (((std::int64_t(1) << m) - 2) * (std::int64_t(1) << m) + i) << (K - 2 * m);
      // tooth = [off, off + 2^(K-2m)/10] in cell units, endpoints closed
      std::int64_t cmax = off + (std::int64_t(1) << (K - 2 * m)) / 10;
      for (std::int64_t c = off; c <= cmax; ++c) cells.push_back({c, 0, 0});
    }
  }
  return {GridSet::from_cells(1, K, std::move(cells)),
          {"interval_comb", {{"depth", double(depth)}, {"j_max", double(j_max)}}, {}}};
}

namespace {

void percolate(int dim, int depth, double p, std::uint64_t seed, const CubeIndex& q,
               std::vector<Corner>& out) {
  std::uint64_t h = mix_key(seed, std::uint64_t(q.depth));
  for (int i = 0; i < dim; ++i) h = mix_key(h, std::uint64_t(q.corner[i]));
  if (uniform01(h) >= p) return;
  if (q.depth == depth) {
    out.push_back(q.corner);
    return;
  }
  for (unsigned o = 0; o < (1u << dim); ++o) percolate(dim, depth, p, seed, q.child(o), out);
}

}  // namespace

NamedSet gen_percolation(int dim, int depth, double p, std::uint64_t seed) {
  require(p >= 0.0 && p <= 1.0, "percolation: p must lie in [0,1]");
  require(depth >= 1 && depth <= grid_depth_cap(dim),
          "percolation: depth outside the cap for this dimension");
  std::vector<Corner> cells;
  CubeIndex root{dim, 0, {}};
  for (unsigned o = 0; o < (1u << dim); ++o) percolate(dim, depth, p, seed, root.child(o), cells);
  NamedSet out{GridSet::from_cells(dim, depth, std::move(cells)),
               {"percolation",
                {{"depth", double(depth)}, {"dim", double(dim)}, {"p", p}},
                seed}};
  return out;
}

NamedSet generate(const GeneratorInfo& info) {
  auto param = [&](const char* key) {
    auto it = info.params.find(key);
    require(it != info.params.end(), std::string("generator parameter missing: ") + key);
    return it->second;
  };
  auto iparam = [&](const char* key) {
    double v = param(key);
    require(v == std::floor(v), std::string("generator parameter must be integer: ") + key);
    return int(v);
  };

  if (info.name == "full_cube") return gen_full_cube(iparam("dim"), iparam("depth"));
  if (info.name == "cantor_base4") return gen_cantor_base4(iparam("t"));
  if (info.name == "dust_comb") return gen_dust_comb(iparam("j_max"));
  if (info.name == "interval_comb") {
    int j = iparam("j_max");
    int depth = info.params.count("depth") ? iparam("depth") : interval_comb_default_depth(j);
    return gen_interval_comb(j, depth);
  }
  if (info.name == "percolation") {
    require(info.seed.has_value(), "percolation: seed required");
    return gen_percolation(iparam("dim"), iparam("depth"), param("p"), *info.seed);
  }
  throw domain_error("unknown generator: " + info.name);
}

}  // namespace dhc
