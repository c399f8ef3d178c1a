#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dhc/cube.hpp"

namespace dhc {

// Integer cell box [lo, hi) at the leaf depth of a grid, per-axis half-open.
struct CellBox {
  int dim = 1;
  Corner lo{};
  Corner hi{};

  bool empty() const {
    for (int i = 0; i < dim; ++i)
      if (lo[i] >= hi[i]) return true;
    return false;
  }
  std::int64_t volume_cells() const {
    std::int64_t v = 1;
    for (int i = 0; i < dim; ++i) v *= (hi[i] > lo[i]) ? hi[i] - lo[i] : 0;
    return v;
  }
};

CellBox intersect(const CellBox& a, const CellBox& b);

// Deepest grid a generator or file may use per dimension (24 / 14 / 9).
// Grids themselves admit two extra levels for internal refinement steps.
int grid_depth_cap(int dim);

// Compact set in the unit cube represented on the depth-K dyadic grid as a
// union of closed cells (outer approximation). Stored as the canonical
// empty/full/mixed cube tree: mixed nodes carry 2^dim children, a node is
// full only when not all of its parent's siblings are (otherwise the parent
// collapses), and empty/full leaves terminate branches early. Two equal cell
// sets therefore have identical trees. Also used for plain cell regions,
// where no outer-approximation semantics are implied.
class GridSet {
 public:
  enum class Kind : unsigned char { empty, full, mixed };

  struct Node {
    Kind kind = Kind::empty;
    std::uint32_t child0 = 0;  // children child0 .. child0 + 2^dim - 1
    bool operator==(const Node&) const = default;
  };

  GridSet() = default;
  GridSet(int dim, int depth);  // empty set

  static GridSet from_cells(int dim, int depth, std::vector<Corner> cells);
  static GridSet full_cube(int dim, int depth);

  // Adopts an already-canonical node tree (counts and depths are rebuilt).
  // Callers are responsible for canonical layout; prefer the set operations.
  static GridSet from_nodes(int dim, int depth, std::vector<Node> nodes);

  int dim() const { return dim_; }
  int depth() const { return depth_; }
  std::int64_t cells_per_axis() const { return std::int64_t(1) << depth_; }

  bool empty() const { return nodes_[0].kind == Kind::empty; }
  bool full() const { return nodes_[0].kind == Kind::full; }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::uint64_t>& node_cell_counts() const { return cell_counts_; }
  const std::vector<std::uint8_t>& node_depths() const { return node_depths_; }

  std::uint64_t cell_count() const { return cell_counts_[0]; }
  double measure() const;  // cell_count * 2^(-dim*depth), exact

  // State of the dyadic cube q (depth <= grid depth, inside the unit box).
  // Cubes outside the unit box are empty.
  Kind cube_state(const CubeIndex& q) const;
  bool cube_meets_set(const CubeIndex& q) const { return cube_state(q) != Kind::empty; }

  bool cell_occupied(const Corner& cell) const;
  bool point_occupied(const Point& x) const;  // cell of x; boundary points: any touching cell

  // Occupied-cell count inside a leaf-depth cell box (clipped to the grid).
  std::uint64_t count_in_box(const CellBox& b) const;

  void visit_cells(const std::function<void(const Corner&)>& fn) const;
  std::vector<Corner> cells() const;

  // Occupied nodes (full or mixed) at an exact depth, as cube corners.
  std::vector<Corner> occupied_nodes_at_depth(int k) const;

  bool operator==(const GridSet& o) const {
    return dim_ == o.dim_ && depth_ == o.depth_ && nodes_ == o.nodes_;
  }

 private:
  int dim_ = 1;
  int depth_ = 0;
  std::vector<Node> nodes_;                  // node 0 = root, children contiguous
  std::vector<std::uint64_t> cell_counts_;   // occupied leaf cells under node
  std::vector<std::uint8_t> node_depths_;

  void finalize();  // recompute counts/depths after structural edits
};

using GridRegion = GridSet;

// Set algebra at the common refinement of the two depths (dims must match).
GridSet set_union(const GridSet& a, const GridSet& b);
GridSet set_intersection(const GridSet& a, const GridSet& b);
GridSet set_difference(const GridSet& a, const GridSet& b);

// Region of all cells of the dyadic cube q (q within the unit box).
GridRegion cube_region(int dim, int depth, const CubeIndex& q);

// Region of all cells in a leaf-depth cell box (clipped to the grid).
GridRegion box_region(int dim, int depth, const CellBox& cells);

CellBox cube_cell_box(int grid_depth, const CubeIndex& q);

// Cells meeting the closed real box [lo,hi] (clipped to the unit box).
CellBox outer_cell_box(int dim, int grid_depth, const double* lo, const double* hi);

}  // namespace dhc
