#pragma once

#include <utility>
#include <vector>

#include "dhc/cube.hpp"
#include "dhc/grid_set.hpp"

namespace dhc {

// Min-cost covering table over a set's cube tree for one exponent d:
// cost[i] is the exact dyadic d-content of the occupied cells under node i,
// cost[i] = min( side^d [node nonempty], sum of children costs ), and
// take_self[i] records the choice with ties (1e-9 relative) going to self.
// Indices parallel set->nodes(); the set must outlive the table.
struct ContentTable {
  int dim = 1;
  int depth = 0;
  double d = 0.0;
  const GridSet* set = nullptr;
  std::vector<double> cost;
  std::vector<unsigned char> take_self;

  double root_cost() const { return cost.empty() ? 0.0 : cost[0]; }
};

ContentTable build_content_table(const GridSet& s, double d);         // parallel
ContentTable build_content_table_serial(const GridSet& s, double d);  // reference

// Exact minimum of sum of (side)^d over non-overlapping dyadic coverings of
// the occupied cells inside q. Cubes outside the unit box are empty; cubes
// deeper than the grid inherit the containing cell's state.
double dyadic_content(const ContentTable& t, const CubeIndex& q);
double dyadic_content(const GridSet& s, const CubeIndex& q, double d);
double dyadic_content(const GridSet& s, double d);  // whole set

// Non-overlapping covering C of the occupied cells inside q with
// sum <= (1+eps) * dyadic_content, maximal (top-down extraction: take a cube
// as soon as its self cost fits the budget, otherwise descend).
CubeFamily optimal_covering(const ContentTable& t, const CubeIndex& q, double eps = 0.0);

struct ThicknessQuery {
  double d = 0.0;
  double lambda = 1.0;  // in (0, 1]
};

// Dyadic thickness: content(q cap S) >= lambda * side(q)^d (1e-9 relative).
bool is_thick(const ContentTable& t, const CubeIndex& q, const ThicknessQuery& tq);

// Geometric windows are snapped outward to the grid (a cell counts when it
// meets the closed window). dyadic=true compares the snapped content;
// dyadic=false uses the conservative shifted-grid lower bound instead.
bool is_thick(const ContentTable& t, const GeomCube& w, const ThicknessQuery& tq,
              bool dyadic = true);

// Content of the occupied cells inside the snapped closed window.
double window_content(const ContentTable& t, const GeomCube& w);

// (lower, upper) bracket for the non-dyadic d-content of S cap q:
// upper = dyadic content; lower = best of the 2^dim half-cell-shifted
// dyadic contents divided by 2^dim.
std::pair<double, double> hausdorff_content_bounds(const GridSet& s, const CubeIndex& q,
                                                   double d);

// Empirical lower-content-regularity constant: minimum over occupied nodes'
// centers x at max_depth and half-sides l = 2^-k, k in [min_depth, max_depth],
// of window_content(Q_l(x)) / l^d.
double lcr_lambda(const GridSet& s, double d, int min_depth, int max_depth);

}  // namespace dhc
