#pragma once

#include <cstdint>
#include <vector>

#include "dhc/content.hpp"
#include "dhc/cube.hpp"
#include "dhc/grid_set.hpp"

namespace dhc {

// Shared engine for searches over grid-anchored cubes: closed cubes whose
// corners sit on the leaf lattice, with side j cells for any j in [1, 2^K].
// Thickness of an anchored cube compares the content of its snapped window
// (cells meeting the closed cube, halo included) against lambda * side^d,
// matching the window conventions of the content queries. A dense prefix-sum
// count and two dyadic content comparisons prune almost all candidates before
// the exact window cover runs.
class ThickScan {
 public:
  ThickScan(const GridSet& s, double d);

  int dim() const { return table_.dim; }
  int depth() const { return table_.depth; }
  const ContentTable& table() const { return table_; }

  // occupied cells in the leaf box [lo, hi), clipped to the grid
  std::uint64_t count(const Corner& lo, const Corner& hi) const;

  // anchored cube with corner a (cells) and side j cells
  bool thick(const Corner& a, std::int64_t j, double lambda) const;

  // false when no anchored cube with side in [2^-k, 2^-k+1) can be thick:
  // its window lies in at most 3^dim depth-k dyadic cubes, so one of them
  // must carry content ratio at least lambda / 3^dim
  bool scale_possible(int k, double lambda) const;

  // smallest anchored thick cube containing x (and y), in cells:
  // 0 when x is occupied, -1 when no side up to the full box works.
  // anchor receives the realizing corner when given. x may lie outside the
  // unit box; only in-box cells ever contribute content. Cost grows with
  // the answer (all smaller sides are ruled out by enumeration).
  std::int64_t min_thick_side_cells(const Point& x, double lambda,
                                    Corner* anchor = nullptr) const;
  std::int64_t min_thick_side_cells(const Point& x, const Point& y, double lambda,
                                    Corner* anchor = nullptr) const;

 private:
  ContentTable table_;
  std::vector<std::uint32_t> prefix_;  // (2^K+1)^dim occupied-cell counts
  std::vector<double> max_ratio_;      // per depth: best content / side^d
  std::int64_t stride_[kMaxDim]{};

  bool window_passes(const Corner& a, std::int64_t j, double thr) const;
};

// Point-to-set thick distance over the anchored class.
struct ThickDistance {
  double value = 0.0;        // grid-exact anchored minimum, +inf when none
  double bracket_lo = 0.0;   // continuum infimum >= this (valid once the
                             // answer spans at least two cells)
  double bracket_hi = 0.0;   // continuum infimum <= this (= value)
  bool hypothesis_met = true;  // x inside (content(S)/lambda)^(1/d) Q_{0,0}
};

// Smallest side over anchored thick cubes containing x; 0 on occupied cells.
// The lower bracket re-runs the search at lambda / 2^d: a thick cube of any
// placement snaps outward to an anchored one of at most twice the side, so
// the relaxed minimum halved bounds the continuum infimum from below.
ThickDistance thick_distance_info(const GridSet& s, double d, double lambda, const Point& x);
double thick_distance(const GridSet& s, double d, double lambda, const Point& x);

// Distance values at every cell center. Gated by field_depth_cap.
struct ThickDistanceField {
  double d = 0.0;
  double lambda = 1.0;
  int dim = 1;
  int depth = 0;
  std::vector<double> value;  // axis-0 minor layout, +inf where unreachable

  std::size_t index(const Corner& cell) const;
  double at(const Corner& cell) const { return value[index(cell)]; }
};

int field_depth_cap(int dim);  // 12 / 8 / 5

ThickDistanceField thick_distance_field(const GridSet& s, double d, double lambda);
ThickDistanceField thick_distance_field_serial(const GridSet& s, double d, double lambda);

// Union of the cell coverage of anchored thick cubes with side strictly
// below delta, plus the set itself. Coverage of an anchored cube is the
// cells whose centers it contains. delta = 0 returns the occupied cells.
GridRegion thick_neighborhood(const GridSet& s, double d, double lambda, double delta);

// Pairwise smallest-thick-cube sides over all cell centers of the grid box.
// Row scans enumerate anchored cubes by ascending side, so entry (u, v) is
// the side of the smallest thick cube containing both centers (+inf when
// none). Gated by pseudometric_cell_cap.
class PseudometricTable {
 public:
  PseudometricTable(const GridSet& s, double d, double lambda, bool parallel);

  const GridSet& set() const { return *set_; }
  double d() const { return d_; }
  double lambda() const { return lambda_; }
  int dim() const { return dim_; }
  int depth() const { return depth_; }
  std::int64_t nodes() const { return n_; }

  std::size_t cell_index(const Corner& cell) const;
  Corner cell_of(std::size_t idx) const;
  Point center_of(std::size_t idx) const;
  double link(std::size_t u, std::size_t v) const { return w_[u * n_ + v]; }

  // least chain sum from u with at most max_hops links, one entry per node
  std::vector<double> chain_values(std::size_t u, int max_hops,
                                   std::vector<std::size_t>* pred = nullptr) const;

 private:
  const GridSet* set_;
  double d_, lambda_;
  int dim_, depth_;
  std::int64_t n_;
  std::vector<double> w_;
};

std::int64_t pseudometric_cell_cap();  // total grid cells, 1024

PseudometricTable build_pseudometric_table(const GridSet& s, double d, double lambda);
PseudometricTable build_pseudometric_table_serial(const GridSet& s, double d, double lambda);

struct PseudometricEval {
  Point x{};
  Point y{};
  double value = 0.0;
  bool via_sup = false;  // both endpoints off the set: max/sup formula used
  Point sup_point{};     // occupied center attaining the sup (when via_sup)
  std::vector<Point> chain;      // realizing chain of cell centers
  std::vector<GeomCube> cubes;   // cube per chain link; only filled for
                                 // evaluations with an endpoint on the set
};

// Pseudometric between two points of the unit box, snapped to cell centers.
// With an endpoint on the set: least chain sum of smallest-common-cube sides
// over at most chain_cap links. Both endpoints off the set: +inf if some
// occupied center is unreachable from either side, otherwise
// max(|x-y|_inf, sup over occupied centers of the chain-value difference).
PseudometricEval pseudometric(const PseudometricTable& t, const Point& x, const Point& y,
                              int chain_cap);
PseudometricEval pseudometric(const GridSet& s, double d, double lambda, const Point& x,
                              const Point& y, int chain_cap);

// Grid measure bracket: the true value lies in [value - slack, value].
struct VolumeEstimate {
  double value = 0.0;
  double slack = 0.0;
};

// Measure of the open eps-neighborhood (sup norm) of the region, clipped to
// the unit box, by cell distance transform: exact when eps is a multiple of
// the cell width. eps = 0 gives the region's own measure.
VolumeEstimate neighborhood_volume(const GridRegion& region, double eps);
VolumeEstimate neighborhood_volume(int depth, const CubeFamily& f, double eps);

// Union measure of the members meeting the boundary of q (unclipped; the
// family must be non-overlapping) against the strip bound
// 2^(2n) l(q)^(n-1) roof. Requires roof < l(q) / 2.
struct StripVolume {
  double value = 0.0;
  double bound = 0.0;
  bool ok = false;
};

StripVolume boundary_strip_volume(const GeomCube& q, const CubeFamily& f);
StripVolume boundary_strip_volume(const CubeIndex& q, const CubeFamily& f);

// Audit of the covering-volume inequality
//   vol(U_{r delta tau}(F)) <= cbar * tau^(n-d) * sum of side^d
// for families with sides in [delta tau, tau]. delta_bar is the largest
// admissible delta produced by the split of the family at scale 2^-k*:
// theta^n + (floor(2r)+1)^n / 2^(k* (n-d)) < cbar with
// delta_bar = (theta - 1) 2^-k* / (2 floor(r) + 1), maximized over theta.
struct NeighborhoodVolumeAudit {
  double delta_bar = 0.0;
  bool hypothesis_ok = false;
  double volume = 0.0;
  double bound = 0.0;
  bool ok = false;
};

NeighborhoodVolumeAudit neighborhood_volume_audit(int depth, const CubeFamily& f, double d,
                                                  double tau, double delta, double r,
                                                  double cbar);

}  // namespace dhc
