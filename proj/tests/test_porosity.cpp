#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "doctest.h"
#include "dhc/content.hpp"
#include "dhc/generators.hpp"
#include "dhc/grid_set.hpp"
#include "dhc/porosity.hpp"
#include "dhc/thick_metric.hpp"
#include "test_support.hpp"

using namespace dhc;

TEST_SUITE_BEGIN("porosity");

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Every dyadic cube of depth 0..max_depth inside the unit box.
std::vector<CubeIndex> all_cubes(int dim, int max_depth) {
  std::vector<CubeIndex> out;
  for (int k = 0; k <= max_depth; ++k) {
    std::int64_t n = std::int64_t(1) << k;
    Corner c{};
    while (true) {
      out.push_back(CubeIndex{dim, k, c});
      int axis = 0;
      while (axis < dim && ++c[axis] == n) {
        c[axis] = 0;
        ++axis;
      }
      if (axis == dim) break;
    }
  }
  return out;
}

bool occupied_cell(const GridSet& s, const Corner& c) {
  CellBox b{s.dim(), c, c};
  for (int i = 0; i < s.dim(); ++i) b.hi[i] = c[i] + 1;
  return s.count_in_box(b) == 1;
}

bool lex_less(int dim, const Corner& a, const Corner& b) {
  for (int i = 0; i < dim; ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

struct BruteHole {
  std::int64_t j = 0;
  Corner corner{};
};

// Exhaustive anchored search: every low corner in the box, every side that
// fits, emptiness by scanning the covered cells one by one.
BruteHole brute_hole(const GridSet& s, const CellBox& box) {
  BruteHole best;
  Corner c = box.lo;
  if (box.empty()) return best;
  while (true) {
    std::int64_t fit = std::numeric_limits<std::int64_t>::max();
    for (int i = 0; i < s.dim(); ++i) fit = std::min(fit, box.hi[i] - c[i]);
    for (std::int64_t j = 1; j <= fit; ++j) {
      bool empty = true;
      Corner x = c;
      while (empty) {
        if (occupied_cell(s, x)) empty = false;
        int axis = 0;
        while (axis < s.dim() && ++x[axis] == c[axis] + j) {
          x[axis] = c[axis];
          ++axis;
        }
        if (axis == s.dim()) break;
      }
      if (!empty) break;
      if (j > best.j || (j == best.j && lex_less(s.dim(), c, best.corner))) best = {j, c};
    }
    int axis = 0;
    while (axis < s.dim() && ++c[axis] == box.hi[axis]) {
      c[axis] = box.lo[axis];
      ++axis;
    }
    if (axis == s.dim()) break;
  }
  return best;
}

// Neighborhood oracle: a cell joins when it is occupied or some anchored
// window of side j < delta/h (in cells) containing its center is thick.
// Windows are checked through the geometric thickness test, which the metric
// suite pins to the anchored-scan semantics.
bool cell_in_neighborhood(const ContentTable& t, const std::vector<unsigned char>& occ,
                          const Corner& c, std::int64_t flat, double d, double lambda,
                          double dl) {
  if (occ[std::size_t(flat)]) return true;
  const GridSet& s = *t.set;
  const double h = pow2(-s.depth());
  const std::int64_t b = s.cells_per_axis();
  const ThicknessQuery tq{d, lambda};
  for (std::int64_t j = 1; j <= b && double(j) * h < dl; ++j) {
    Corner a;
    for (int i = 0; i < s.dim(); ++i) a[i] = c[i] + 1 - j;
    while (true) {
      GeomCube w;
      w.dim = s.dim();
      w.half_side = 0.5 * double(j) * h;
      for (int i = 0; i < s.dim(); ++i)
        w.center[i] = (double(a[i]) + 0.5 * double(j)) * h;
      if (is_thick(t, w, tq, true)) return true;
      int axis = 0;
      while (axis < s.dim() && ++a[axis] == c[axis] + 1) {
        a[axis] = c[axis] + 1 - j;
        ++axis;
      }
      if (axis == s.dim()) break;
    }
  }
  return false;
}

std::vector<unsigned char> occupancy_map(const GridSet& s) {
  std::int64_t b = s.cells_per_axis();
  std::int64_t total = 1;
  for (int i = 0; i < s.dim(); ++i) total *= b;
  std::vector<unsigned char> occ(std::size_t(total), 0);
  s.visit_cells([&](const Corner& c) {
    std::int64_t f = 0, stride = 1;
    for (int i = 0; i < s.dim(); ++i) {
      f += c[i] * stride;
      stride *= b;
    }
    occ[std::size_t(f)] = 1;
  });
  return occ;
}

GridRegion brute_cavity_region(const GridSet& s, double d, double lambda,
                               const CubeIndex& qbar, double delta) {
  ContentTable t = build_content_table(s, d);
  auto occ = occupancy_map(s);
  const double dl = delta * qbar.side();
  CellBox box = cube_cell_box(s.depth(), qbar);
  const std::int64_t b = s.cells_per_axis();
  std::vector<Corner> keep;
  Corner c = box.lo;
  while (true) {
    std::int64_t f = 0, stride = 1;
    for (int i = 0; i < s.dim(); ++i) {
      f += c[i] * stride;
      stride *= b;
    }
    if (!cell_in_neighborhood(t, occ, c, f, d, lambda, dl)) keep.push_back(c);
    int axis = 0;
    while (axis < s.dim() && ++c[axis] == box.hi[axis]) {
      c[axis] = box.lo[axis];
      ++axis;
    }
    if (axis == s.dim()) break;
  }
  return GridSet::from_cells(s.dim(), s.depth(), std::move(keep));
}

bool same_region(const GridRegion& a, const GridRegion& b) {
  return a.dim() == b.dim() && a.depth() == b.depth() && a.nodes() == b.nodes();
}

double exact_gamma(const GridRegion& region, const CubeIndex& q) {
  return std::ldexp(double(region.cell_count()), q.dim * (q.depth - region.depth()));
}

}  // namespace

TEST_CASE("largest empty cube matches the exhaustive anchored search") {
  struct Probe {
    int dim;
    int depth;
    double fill;
    std::uint64_t seed;
  };
  const Probe probes[] = {
      {1, 5, 0.2, 11}, {1, 5, 0.55, 12}, {1, 6, 0.85, 13}, {2, 3, 0.25, 21},
      {2, 3, 0.5, 22}, {2, 4, 0.7, 23},  {3, 2, 0.3, 31},  {3, 2, 0.75, 32},
  };
  for (const auto& p : probes) {
    GridSet s = test_support::random_set(p.dim, p.depth, p.fill, p.seed);
    std::vector<CubeIndex> queries;
    queries.push_back(CubeIndex{p.dim, 0, {}});
    for (unsigned o = 0; o < (1u << p.dim); ++o)
      queries.push_back(CubeIndex{p.dim, 0, {}}.child(o));
    queries.push_back(CubeIndex{p.dim, 0, {}}.child(0).child((1u << p.dim) - 1));
    for (const auto& q : queries) {
      PorosityCertificate cert = porosity_certificate(s, q);
      BruteHole ref = brute_hole(s, cube_cell_box(p.depth, q));
      CHECK(cert.query == q);
      CHECK(cert.has_hole == (ref.j > 0));
      CHECK(cert.tau == std::ldexp(double(ref.j), q.depth - p.depth));
      if (ref.j > 0) {
        const double h = pow2(-p.depth);
        CHECK(cert.hole.half_side == 0.5 * double(ref.j) * h);
        for (int i = 0; i < p.dim; ++i)
          CHECK(cert.hole.center[i] == (double(ref.corner[i]) + 0.5 * double(ref.j)) * h);
        CHECK(cert.tau > 0.0);
        CHECK(cert.tau <= 1.0);
        CHECK(cert.hole.contained_in(to_geom(q)));
        CellBox cells{p.dim, {}, {}};
        for (int i = 0; i < p.dim; ++i) {
          cells.lo[i] = ref.corner[i];
          cells.hi[i] = ref.corner[i] + ref.j;
        }
        CHECK(s.count_in_box(cells) == 0);
      }
    }
  }
}

TEST_CASE("porosity certificate: frozen dust holes") {
  GridSet s = gen_cantor_base4(2).set;  // occupied cells 0, 3, 12, 15 at depth 4

  PorosityCertificate root = porosity_certificate(s, CubeIndex{1, 0, {}});
  CHECK(root.has_hole);
  CHECK(root.tau == 0.5);
  CHECK(root.hole.center[0] == 0.5);
  CHECK(root.hole.half_side == 0.25);

  PorosityCertificate half = porosity_certificate(s, CubeIndex{1, 1, {0}});
  CHECK(half.tau == 0.5);
  CHECK(half.hole.center[0] == 0.375);  // cells 4..7 of 16

  PorosityCertificate quarter = porosity_certificate(s, CubeIndex{1, 2, {0}});
  CHECK(quarter.tau == 0.5);  // cells 1..2 of 16
  CHECK(quarter.hole.half_side == 0.0625);

  PorosityCertificate cell = porosity_certificate(s, CubeIndex{1, 4, {1}});
  CHECK(cell.has_hole);
  CHECK(cell.tau == 1.0);

  PorosityCertificate full_cell = porosity_certificate(s, CubeIndex{1, 4, {0}});
  CHECK(!full_cell.has_hole);
  CHECK(full_cell.tau == 0.0);

  GridSet full = gen_full_cube(1, 4).set;
  PorosityCertificate none = porosity_certificate(full, CubeIndex{1, 0, {}});
  CHECK(!none.has_hole);
  CHECK(none.tau == 0.0);

  CHECK_THROWS_AS((void)porosity_certificate(s, CubeIndex{2, 0, {}}), domain_error);
  CHECK_THROWS_AS((void)porosity_certificate(s, CubeIndex{1, 5, {0}}), domain_error);
  CHECK_THROWS_AS((void)porosity_certificate(s, CubeIndex{1, 2, {4}}), domain_error);
  CHECK_THROWS_AS((void)porosity_certificate(s, CubeIndex{1, 2, {-1}}), domain_error);
}

TEST_CASE("porosity certificate: comb gaps shrink with the block index") {
  const int K = 12;
  GridSet s = gen_interval_comb(3, K).set;
  double prev = 2.0;
  for (int m = 1; m <= 3; ++m) {
    CubeIndex block{1, m, {(std::int64_t(1) << m) - 2}};
    PorosityCertificate cert = porosity_certificate(s, block);
    const std::int64_t period = std::int64_t(1) << (K - 2 * m);
    const std::int64_t gap = period - period / 10 - 1;
    CHECK(cert.has_hole);
    CHECK(cert.tau == std::ldexp(double(gap), m - K));
    CHECK(cert.hole.half_side == 0.5 * double(gap) * pow2(-K));
    const std::int64_t first_gap =
        ((std::int64_t(1) << m) - 2) * (std::int64_t(1) << (K - m)) + period / 10 + 1;
    CHECK(cert.hole.center[0] == (double(first_gap) + 0.5 * double(gap)) * pow2(-K));
    CHECK(cert.tau < prev);
    prev = cert.tau;
  }
}

TEST_CASE("cavity at zero delta is the empty part of the query") {
  struct Probe {
    int dim;
    int depth;
    double fill;
    std::uint64_t seed;
    double d;
  };
  const Probe probes[] = {{1, 6, 0.4, 41, 0.5}, {2, 4, 0.3, 42, 1.2}, {3, 3, 0.5, 43, 2.0}};
  for (const auto& p : probes) {
    GridSet s = test_support::random_set(p.dim, p.depth, p.fill, p.seed);
    for (const auto& q :
         {CubeIndex{p.dim, 0, {}}, CubeIndex{p.dim, 1, {}}, CubeIndex{p.dim, 1, {1, 0, 0}}}) {
      CavityReport rep = cavity_W(s, p.d, 0.5, q, 0.0);
      GridRegion expect = set_difference(cube_region(p.dim, p.depth, q), s);
      CHECK(same_region(rep.region, expect));
      CellBox box = cube_cell_box(p.depth, q);
      double occ_ratio = std::ldexp(double(s.count_in_box(box)), p.dim * (q.depth - p.depth));
      CHECK(rep.gamma == 1.0 - occ_ratio);
      CHECK(rep.gamma == exact_gamma(rep.region, q));
      CHECK(rep.delta == 0.0);
      CHECK(rep.lambda == 0.5);
      CHECK(rep.d == p.d);
    }
  }
}

TEST_CASE("cavity regions match brute anchored windows") {
  struct Probe {
    int dim;
    int depth;
    double fill;
    std::uint64_t seed;
  };
  const Probe probes[] = {{1, 5, 0.3, 51}, {1, 5, 0.6, 52}, {2, 3, 0.35, 53}, {2, 3, 0.6, 54}};
  for (const auto& p : probes) {
    GridSet s = test_support::random_set(p.dim, p.depth, p.fill, p.seed);
    const double d = p.dim == 1 ? 0.5 : 1.4;
    for (double lambda : {0.35, 0.9}) {
      for (double delta : {0.15, 0.6}) {
        for (const auto& q : {CubeIndex{p.dim, 0, {}}, CubeIndex{p.dim, 1, {1, 0, 0}}}) {
          CavityReport rep = cavity_W(s, d, lambda, q, delta);
          GridRegion ref = brute_cavity_region(s, d, lambda, q, delta);
          CHECK(same_region(rep.region, ref));
          CHECK(rep.gamma == exact_gamma(ref, q));
        }
      }
    }
  }
}

TEST_CASE("cavity regions nest as delta grows and gamma tracks them") {
  GridSet s = test_support::random_set(2, 4, 0.3, 77);
  CubeIndex q{2, 1, {1, 1}};
  double prev_gamma = 2.0;
  GridRegion prev = cube_region(2, 4, q);
  for (double delta : {0.0, 0.1, 0.25, 0.5, 1.0, 2.0}) {
    CavityReport rep = cavity_W(s, 1.3, 0.4, q, delta);
    CHECK(set_difference(rep.region, prev).empty());
    CHECK(rep.gamma <= prev_gamma);
    CHECK(rep.gamma == exact_gamma(rep.region, q));
    prev = rep.region;
    prev_gamma = rep.gamma;
  }
  CHECK_THROWS_AS((void)cavity_W(s, 1.3, 0.4, q, -0.5), domain_error);
  CHECK_THROWS_AS((void)cavity_W(s, 1.3, 0.4, CubeIndex{2, 9, {0, 0}}, 0.5), domain_error);
}

TEST_CASE("comb block cavity empties at the tooth scale") {
  const int K = 10;
  GridSet s = gen_interval_comb(2, K).set;
  CubeIndex block{1, 2, {2}};
  // 4 teeth of 7 cells inside 256.
  CavityReport base = cavity_W(s, 1.0, 0.1, block, 0.0);
  CHECK(base.gamma == 1.0 - 28.0 / 256.0);

  CavityReport tiny = cavity_W(s, 1.0, 0.1, block, 1.0 / 256.0);
  CHECK(tiny.gamma == base.gamma);  // radius below one cell adds nothing

  CavityReport wide = cavity_W(s, 1.0, 0.1, block, 0.3);
  CHECK(wide.gamma == 0.0);
  CHECK(wide.region.empty());

  CavityReport wider = cavity_W(s, 1.0, 0.1, block, 0.6);
  CHECK(wider.gamma == 0.0);
}

TEST_CASE("thin subcube agrees with a level-order oracle") {
  struct Probe {
    int dim;
    int depth;
    double fill;
    std::uint64_t seed;
    double d;
  };
  const Probe probes[] = {{1, 6, 0.3, 61, 0.5}, {1, 6, 0.7, 62, 1.0}, {2, 4, 0.3, 63, 1.3}};
  for (const auto& p : probes) {
    GridSet s = test_support::random_set(p.dim, p.depth, p.fill, p.seed);
    ContentTable t = build_content_table(s, p.d);
    for (double lambda_bar : {0.35, 0.8}) {
      for (double c : {1.5, 4.0}) {
        for (const auto& qbar : all_cubes(p.dim, 2)) {
          if (geq_rel(dyadic_content(t, qbar), lambda_bar * side_pow(qbar.depth, p.d)))
            continue;
          ThinSubcube got = thin_subcube(s, p.d, lambda_bar, c, qbar);
          // level scan, corners in lexicographic order
          bool found = false;
          for (int k = qbar.depth; k <= p.depth && !found; ++k) {
            const int m = k - qbar.depth;
            const std::int64_t span = std::int64_t(1) << m;
            const double thr = (lambda_bar / c) * side_pow(k, p.d);
            Corner off{};
            while (true) {
              CubeIndex cube{p.dim, k, {}};
              for (int i = 0; i < p.dim; ++i) cube.corner[i] = (qbar.corner[i] << m) + off[i];
              if (!geq_rel(dyadic_content(t, cube), thr)) {
                found = true;
                CHECK(got.found);
                CHECK(got.cube == cube);
                CHECK(got.kappa == pow2(qbar.depth - k));
                break;
              }
              int axis = p.dim - 1;
              while (axis >= 0 && ++off[axis] == span) off[axis--] = 0;
              if (axis < 0) break;
            }
          }
          if (!found) {
            CHECK(!got.found);
            CHECK(got.kappa == 0.0);
          }
        }
      }
    }
  }
}

TEST_CASE("thin subcube: frozen dust gap and trivial cases") {
  GridSet s = gen_cantor_base4(2).set;

  ThinSubcube gap = thin_subcube(s, 0.5, 0.9, 2.0, CubeIndex{1, 1, {0}});
  CHECK(gap.found);
  CHECK(gap.cube == CubeIndex{1, 2, {1}});
  CHECK(gap.kappa == 0.5);

  ThinSubcube empty = thin_subcube(s, 0.5, 0.9, 2.0, CubeIndex{1, 2, {2}});
  CHECK(empty.found);
  CHECK(empty.cube == CubeIndex{1, 2, {2}});
  CHECK(empty.kappa == 1.0);

  // [0,1/4] carries content 1/2 >= 0.9 * 0.5, so the hypothesis fails.
  CHECK_THROWS_AS((void)thin_subcube(s, 0.5, 0.9, 2.0, CubeIndex{1, 2, {0}}), domain_error);
  CHECK_THROWS_AS((void)thin_subcube(s, 0.5, 0.0, 2.0, CubeIndex{1, 1, {0}}), domain_error);
  CHECK_THROWS_AS((void)thin_subcube(s, 0.5, 1.0, 2.0, CubeIndex{1, 1, {0}}), domain_error);
  CHECK_THROWS_AS((void)thin_subcube(s, 0.5, 0.9, 1.0, CubeIndex{1, 1, {0}}), domain_error);
}

TEST_CASE("thin complement matches the direct dilation scan") {
  struct Probe {
    int dim;
    int depth;
    double fill;
    std::uint64_t seed;
    double d;
  };
  const Probe probes[] = {{1, 6, 0.25, 71, 0.5}, {1, 5, 0.55, 72, 1.0}, {2, 3, 0.3, 73, 1.1}};
  for (const auto& p : probes) {
    GridSet s = test_support::random_set(p.dim, p.depth, p.fill, p.seed);
    ContentTable t = build_content_table(s, p.d);
    auto occ = occupancy_map(s);
    const double h = pow2(-p.depth);
    const std::int64_t b = s.cells_per_axis();
    for (double lambda : {0.3, 0.9}) {
      for (double r : {1.0, 1.5, 3.0}) {
        for (double cap : {0.26, 0.51, 1.0}) {
          for (const auto& qbar : all_cubes(p.dim, 1)) {
            if (geq_rel(dyadic_content(t, qbar), side_pow(qbar.depth, p.d))) continue;
            CavityReport rep = thin_complement(s, p.d, lambda, r, qbar, cap);

            // direct scan: dilations of every small thick cube, no pruning
            std::vector<GeomCube> dil;
            for (const auto& cube : all_cubes(p.dim, p.depth)) {
              if (cube.side() > cap * qbar.side()) continue;
              if (!is_thick(t, cube, ThicknessQuery{p.d, lambda})) continue;
              GeomCube g = dilate(cube, r);
              if (g.meets(to_geom(qbar))) dil.push_back(g);
            }
            CellBox box = cube_cell_box(p.depth, qbar);
            std::vector<Corner> keep;
            Corner c = box.lo;
            while (true) {
              std::int64_t f = 0, stride = 1;
              for (int i = 0; i < p.dim; ++i) {
                f += c[i] * stride;
                stride *= b;
              }
              bool cut = occ[std::size_t(f)] != 0;
              for (std::size_t g = 0; g < dil.size() && !cut; ++g) {
                bool meets = true;
                for (int i = 0; i < p.dim && meets; ++i) {
                  double cl = double(c[i]) * h, ch = double(c[i] + 1) * h;
                  if (cl > dil[g].hi(i) || ch < dil[g].lo(i)) meets = false;
                }
                cut = meets;
              }
              if (!cut) keep.push_back(c);
              int axis = 0;
              while (axis < p.dim && ++c[axis] == box.hi[axis]) {
                c[axis] = box.lo[axis];
                ++axis;
              }
              if (axis == p.dim) break;
            }
            GridRegion ref = GridSet::from_cells(p.dim, p.depth, std::move(keep));
            CHECK(same_region(rep.region, ref));
            CHECK(rep.gamma == exact_gamma(ref, qbar));
            CHECK(rep.r == r);
            CHECK(rep.kappa_cap == cap);
          }
        }
      }
    }
  }
}

TEST_CASE("thin complement: gamma shrinks in both knobs, empty set is all cavity") {
  GridSet empty(2, 4);
  CubeIndex q{2, 1, {0, 1}};
  CavityReport rep = thin_complement(empty, 1.0, 0.5, 2.0, q, 0.5);
  CHECK(rep.gamma == 1.0);
  CHECK(same_region(rep.region, cube_region(2, 4, q)));

  GridSet s = test_support::random_set(2, 4, 0.10, 99);
  ContentTable t = build_content_table(s, 1.0);
  REQUIRE(!geq_rel(dyadic_content(t, q), side_pow(1, 1.0)));
  double prev = 2.0;
  GridRegion prev_region = cube_region(2, 4, q);
  for (double cap : {0.13, 0.26, 0.51, 1.0}) {
    CavityReport c = thin_complement(s, 1.0, 0.5, 2.0, q, cap);
    CHECK(c.gamma <= prev);
    CHECK(set_difference(c.region, prev_region).empty());
    prev = c.gamma;
    prev_region = c.region;
  }
  prev = 2.0;
  prev_region = cube_region(2, 4, q);
  for (double r : {1.0, 2.0, 4.0}) {
    CavityReport c = thin_complement(s, 1.0, 0.5, r, q, 0.51);
    CHECK(c.gamma <= prev);
    CHECK(set_difference(c.region, prev_region).empty());
    prev = c.gamma;
    prev_region = c.region;
  }

  GridSet full = gen_full_cube(1, 3).set;
  CHECK_THROWS_AS((void)thin_complement(full, 1.0, 0.5, 2.0, CubeIndex{1, 0, {}}, 0.5),
                  domain_error);
  CHECK_THROWS_AS((void)thin_complement(s, 1.0, 0.5, 0.9, q, 0.5), domain_error);
  CHECK_THROWS_AS((void)thin_complement(s, 1.0, 0.5, 2.0, q, 0.0), domain_error);
  CHECK_THROWS_AS((void)thin_complement(s, 1.0, 0.0, 2.0, q, 0.5), domain_error);
}

TEST_CASE("hollow bound holds whenever the content hypothesis does") {
  GridSet s = gen_cantor_base4(2).set;
  HollowBound hb = hollow_bound_check(s, 0.5, 0.9, CubeIndex{1, 1, {0}});
  CHECK(hb.gamma_measured == 0.75);  // 2 of 8 cells occupied
  CHECK(hb.gamma_bound == 1.0 - std::pow(0.9, 2.0));
  CHECK(hb.ok);

  HollowBound empty = hollow_bound_check(s, 0.5, 0.9, CubeIndex{1, 2, {2}});
  CHECK(empty.gamma_measured == 1.0);
  CHECK(empty.ok);

  // root content is 1, never below lambda_bar
  CHECK_THROWS_AS((void)hollow_bound_check(s, 0.5, 0.9, CubeIndex{1, 0, {}}), domain_error);
  // d = 0: any nonempty cube has content 1
  CHECK_THROWS_AS((void)hollow_bound_check(s, 0.0, 0.9, CubeIndex{1, 1, {0}}), domain_error);
  HollowBound d0 = hollow_bound_check(s, 0.0, 0.9, CubeIndex{1, 2, {2}});
  CHECK(d0.gamma_bound == 1.0);
  CHECK(d0.ok);

  for (std::uint64_t seed : {101ull, 102ull, 103ull}) {
    GridSet rnd = test_support::random_set(2, 4, 0.3, seed);
    ContentTable t = build_content_table(rnd, 1.3);
    for (double lambda_bar : {0.4, 0.8}) {
      for (const auto& q : all_cubes(2, 3)) {
        if (geq_rel(dyadic_content(t, q), lambda_bar * side_pow(q.depth, 1.3))) continue;
        HollowBound out = hollow_bound_check(rnd, 1.3, lambda_bar, q);
        CHECK(out.ok);
        CHECK(out.gamma_measured >= out.gamma_bound - 1e-9);
      }
    }
  }
}

TEST_CASE("constants table: floors reproduce direct sweeps and flags match rows") {
  std::vector<NamedSet> corpus;
  corpus.push_back(gen_cantor_base4(2));
  corpus.push_back(gen_interval_comb(1, 8));
  const double d = 0.5;
  const std::vector<double> lambdas = {0.4, 0.8};
  const std::vector<double> lambda_bars = {0.3, 0.75};
  const std::vector<double> deltas = {0.125, 0.375, 0.75};

  ConstantsTable table = estimate_constants(corpus, d, lambdas, lambda_bars, deltas);
  REQUIRE(table.rows.size() == lambdas.size() * lambda_bars.size() * deltas.size());
  CHECK(table.d == d);

  std::size_t idx = 0;
  for (double lambda : lambdas) {
    for (double lambda_bar : lambda_bars) {
      for (double delta : deltas) {
        const ConstantsRow& row = table.rows[idx++];
        CHECK(row.lambda == lambda);
        CHECK(row.lambda_bar == lambda_bar);
        CHECK(row.delta == delta);

        double tau_floor = kInf, gamma_floor = kInf;
        std::int64_t thin = 0;
        for (const auto& ns : corpus) {
          ContentTable t = build_content_table(ns.set, d);
          for (const auto& cube : all_cubes(1, ns.set.depth())) {
            if (geq_rel(dyadic_content(t, cube), lambda_bar * side_pow(cube.depth, d)))
              continue;
            ++thin;
            tau_floor = std::min(tau_floor, porosity_certificate(ns.set, cube).tau);
            gamma_floor = std::min(gamma_floor, cavity_W(ns.set, d, lambda, cube, delta).gamma);
          }
        }
        CHECK(row.thin_cubes == thin);
        CHECK(row.vacuous == (thin == 0));
        CHECK(row.tau_floor == tau_floor);
        CHECK(row.gamma_floor == gamma_floor);
        if (!row.vacuous) CHECK(row.tau_floor > 0.0);
      }
    }
  }

  // flags agree with a reconstruction from the rows
  auto row_at = [&](std::size_t li, std::size_t bi, std::size_t di) -> const ConstantsRow& {
    return table.rows[(li * lambda_bars.size() + bi) * deltas.size() + di];
  };
  bool g_ok = true, db_ok = true, dl_ok = true;
  std::vector<double> dbar(lambdas.size() * lambda_bars.size(), 0.0);
  std::vector<bool> have(lambdas.size() * lambda_bars.size(), false);
  for (std::size_t li = 0; li < lambdas.size(); ++li)
    for (std::size_t bi = 0; bi < lambda_bars.size(); ++bi) {
      if (row_at(li, bi, 0).vacuous) continue;
      have[li * lambda_bars.size() + bi] = true;
      for (std::size_t di = 0; di < deltas.size(); ++di)
        if (row_at(li, bi, di).gamma_floor > 0.0)
          dbar[li * lambda_bars.size() + bi] = deltas[di];
    }
  for (std::size_t li = 0; li < lambdas.size(); ++li)
    for (std::size_t di = 0; di < deltas.size(); ++di) {
      double last = kInf;
      for (std::size_t bi = 0; bi < lambda_bars.size(); ++bi) {
        const ConstantsRow& row = row_at(li, bi, di);
        if (row.vacuous) continue;
        if (row.gamma_floor > last) g_ok = false;
        last = row.gamma_floor;
      }
    }
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    double last = kInf;
    for (std::size_t bi = 0; bi < lambda_bars.size(); ++bi) {
      if (!have[li * lambda_bars.size() + bi]) continue;
      double v = dbar[li * lambda_bars.size() + bi];
      if (v > last) db_ok = false;
      last = v;
    }
  }
  for (std::size_t bi = 0; bi < lambda_bars.size(); ++bi) {
    double last = -kInf;
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      if (!have[li * lambda_bars.size() + bi]) continue;
      double v = dbar[li * lambda_bars.size() + bi];
      if (v < last) dl_ok = false;
      last = v;
    }
  }
  CHECK(table.trend_gamma_vs_lambda_bar == g_ok);
  CHECK(table.trend_delta_vs_lambda_bar == db_ok);
  CHECK(table.trend_delta_vs_lambda == dl_ok);

  for (std::size_t li = 0; li < lambdas.size(); ++li)
    for (std::size_t bi = 0; bi < lambda_bars.size(); ++bi)
      CHECK(empirical_delta_bar(table, lambdas[li], lambda_bars[bi]) ==
            dbar[li * lambda_bars.size() + bi]);

  // bit-stable across runs
  ConstantsTable again = estimate_constants(corpus, d, lambdas, lambda_bars, deltas);
  REQUIRE(again.rows.size() == table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    CHECK(again.rows[i].gamma_floor == table.rows[i].gamma_floor);
    CHECK(again.rows[i].tau_floor == table.rows[i].tau_floor);
    CHECK(again.rows[i].thin_cubes == table.rows[i].thin_cubes);
  }
}

TEST_CASE("constants table: full cube corpus is vacuous") {
  std::vector<NamedSet> corpus;
  corpus.push_back(gen_full_cube(2, 3));
  ConstantsTable table = estimate_constants(corpus, 1.0, {0.5}, {0.3, 0.9}, {0.25});
  for (const auto& row : table.rows) {
    CHECK(row.vacuous);
    CHECK(row.thin_cubes == 0);
    CHECK(row.gamma_floor == kInf);
    CHECK(row.tau_floor == kInf);
  }
  CHECK(table.trend_gamma_vs_lambda_bar);
  CHECK(table.trend_delta_vs_lambda_bar);
  CHECK(table.trend_delta_vs_lambda);
  CHECK(empirical_delta_bar(table, 0.5, 0.3) == 0.0);
}

TEST_CASE("constants table rejects bad grids") {
  std::vector<NamedSet> corpus;
  corpus.push_back(gen_cantor_base4(1));
  CHECK_THROWS_AS((void)estimate_constants({}, 0.5, {0.5}, {0.5}, {0.25}), domain_error);
  CHECK_THROWS_AS((void)estimate_constants(corpus, 0.5, {}, {0.5}, {0.25}), domain_error);
  CHECK_THROWS_AS((void)estimate_constants(corpus, 0.5, {0.5}, {}, {0.25}), domain_error);
  CHECK_THROWS_AS((void)estimate_constants(corpus, 0.5, {0.5}, {0.5}, {}), domain_error);
  CHECK_THROWS_AS((void)estimate_constants(corpus, 0.5, {1.5}, {0.5}, {0.25}), domain_error);
  CHECK_THROWS_AS((void)estimate_constants(corpus, 0.5, {0.5}, {1.0}, {0.25}), domain_error);
  CHECK_THROWS_AS((void)estimate_constants(corpus, 0.5, {0.5}, {0.5}, {-0.25}), domain_error);
}

TEST_SUITE_END();
