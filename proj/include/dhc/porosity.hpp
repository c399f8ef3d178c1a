#pragma once

#include <cstdint>
#include <vector>

#include "dhc/cube.hpp"
#include "dhc/generators.hpp"
#include "dhc/grid_set.hpp"

namespace dhc {

// Largest grid-anchored cube inside a query cube covering no occupied cell.
// Anchored: corners on the leaf lattice, side a whole number of cells,
// coverage as everywhere else (the half-open cell range [corner, corner +
// side) per axis). A freely placed empty cube can beat the anchored optimum
// by less than one cell width per side, so tau carries a one-cell error bar.
struct PorosityCertificate {
  CubeIndex query;
  GeomCube hole;         // meaningful when has_hole
  double tau = 0.0;      // side(hole) / side(query)
  bool has_hole = false; // false only when every cell of the query is occupied
};

// Exact scan: a distance-transform style sweep computes, per cell, the
// largest empty anchored cube with that low corner; the maximum over the
// query decides, ties going to the lexicographically smallest corner.
PorosityCertificate porosity_certificate(const GridSet& s, const CubeIndex& q);

// Cells of a query cube surviving a removal step, with the exact surviving
// volume fraction. cavity_W removes the thick neighborhood at radius
// delta * side(query); thin_complement removes closed r-dilations of small
// thick dyadic cubes. Unused parameter fields stay zero.
struct CavityReport {
  CubeIndex query;
  GridRegion region;
  double gamma = 0.0;      // measure(region) / side(query)^dim, exact
  double d = 0.0;
  double lambda = 0.0;
  double delta = 0.0;      // cavity_W
  double r = 0.0;          // thin_complement
  double kappa_cap = 0.0;  // thin_complement
};

// region = qbar minus thick_neighborhood(s, d, lambda, delta * side(qbar)).
// delta = 0 leaves qbar minus the occupied cells; regions nest decreasingly
// in delta. Resource-gated like the distance field.
CavityReport cavity_W(const GridSet& s, double d, double lambda, const CubeIndex& qbar,
                      double delta);

// Largest dyadic sub-cube of qbar whose content stays below lambda_bar / c
// at its own scale. Levels are scanned from qbar downward, corners in
// lexicographic order within a level, so the result is canonical. found =
// false reports that no sub-cube qualifies before the grid bottoms out; the
// finite grid truncates the search, so that is a resolution report, not a
// counterexample. An empty qbar returns itself with kappa 1.
struct ThinSubcube {
  CubeIndex cube;
  double kappa = 0.0;  // side(cube) / side(qbar), 0 when not found
  bool found = false;
};

// Requires content(qbar cap S) < lambda_bar * side(qbar)^d, lambda_bar in
// (0,1), c > 1. Scan budget: at most 2^22 sub-cubes.
ThinSubcube thin_subcube(const GridSet& s, double d, double lambda_bar, double c,
                         const CubeIndex& qbar);

// Requires content(qbar cap S) < side(qbar)^d and r >= 1. Enumerates the
// dyadic thick cubes with side <= kappa_cap * side(qbar) whose closed
// r-dilation meets qbar and removes every cell meeting such a dilation
// (outward snap, as for windows) plus the occupied cells themselves. A
// child's dilation sits inside its parent's when r >= 1, so each branch of
// the enumeration stops at its shallowest qualifying cube.
CavityReport thin_complement(const GridSet& s, double d, double lambda, double r,
                             const CubeIndex& qbar, double kappa_cap);

// Deficient content forces empty volume: content(qbar cap S) < lambda_bar *
// l^d gives measure(S cap qbar) < lambda_bar^(n/d) * l^n, since each cube of
// a covering contributes side^n <= (side^d)^(n/d) and x^(n/d) superadds.
struct HollowBound {
  double gamma_measured = 0.0;  // 1 - measure(S cap qbar) / side(qbar)^n
  double gamma_bound = 0.0;     // 1 - lambda_bar^(n/d)
  bool ok = false;              // gamma_measured >= gamma_bound - 1e-9
};

HollowBound hollow_bound_check(const GridSet& s, double d, double lambda_bar,
                               const CubeIndex& qbar);

// Worst-case floors over a corpus. A dyadic cube is thin at lambda_bar when
// its content sits below lambda_bar * side^d; each row minimizes
// porosity_certificate tau and the cavity_W gamma at its delta over every
// thin cube of every corpus set, all depths down to the grid. Rows whose
// lambda_bar admits no thin cube anywhere are vacuous and carry +inf floors.
struct ConstantsRow {
  double lambda = 0.0;
  double lambda_bar = 0.0;
  double delta = 0.0;
  double gamma_floor = 0.0;
  double tau_floor = 0.0;
  std::int64_t thin_cubes = 0;
  bool vacuous = true;
};

// Trend flags record whether the floors move the way the limit behavior
// suggests; they are diagnostics, never preconditions.
struct ConstantsTable {
  double d = 0.0;
  std::vector<ConstantsRow> rows;         // delta fastest, then lambda_bar, then lambda
  bool trend_gamma_vs_lambda_bar = true;  // gamma floor non-increasing in lambda_bar
  bool trend_delta_vs_lambda_bar = true;  // delta threshold non-increasing in lambda_bar
  bool trend_delta_vs_lambda = true;      // delta threshold non-decreasing in lambda
};

// Grids are sorted ascending and deduplicated. Every lambda costs one
// distance field per set, so the field depth caps bound the corpus. Output
// is a pure function of the inputs regardless of thread count.
ConstantsTable estimate_constants(const std::vector<NamedSet>& corpus, double d,
                                  std::vector<double> lambdas,
                                  std::vector<double> lambda_bars,
                                  std::vector<double> deltas);

// Largest grid delta whose gamma floor stays positive at (lambda,
// lambda_bar); 0 when none does or when the rows there are vacuous.
double empirical_delta_bar(const ConstantsTable& t, double lambda, double lambda_bar);

}  // namespace dhc
