#include "dhc/grid_set.hpp"

#include <algorithm>
#include <cmath>

namespace dhc {

int grid_depth_cap(int dim) {
  require(dim >= 1 && dim <= kMaxDim, "grid: dim must be 1, 2 or 3");
  static constexpr int caps[kMaxDim + 1] = {0, 24, 14, 9};
  return caps[dim];
}

namespace {

void check_dims(int dim, int depth) {
  require(dim >= 1 && dim <= kMaxDim, "grid: dim must be 1, 2 or 3");
  // structural cap: two levels above the I/O cap, room for internal
  // half-cell refinements without widening what files may carry
  require(depth >= 0 && depth <= grid_depth_cap(dim) + 2,
          "grid: depth beyond the cap for this dimension");
}

std::uint64_t morton(const Corner& m, int dim, int depth) {
  std::uint64_t code = 0;
  for (int b = depth - 1; b >= 0; --b) {
    std::uint64_t group = 0;
    for (int i = 0; i < dim; ++i) group |= std::uint64_t((m[i] >> b) & 1) << i;
    code = (code << dim) | group;
  }
  return code;
}

}  // namespace

CellBox intersect(const CellBox& a, const CellBox& b) {
  CellBox r{a.dim, {}, {}};
  for (int i = 0; i < a.dim; ++i) {
    r.lo[i] = std::max(a.lo[i], b.lo[i]);
    r.hi[i] = std::min(a.hi[i], b.hi[i]);
  }
  return r;
}

GridSet::GridSet(int dim, int depth) : dim_(dim), depth_(depth) {
  check_dims(dim, depth);
  nodes_.assign(1, Node{Kind::empty, 0});
  finalize();
}

GridSet GridSet::full_cube(int dim, int depth) {
  check_dims(dim, depth);
  GridSet g;
  g.dim_ = dim;
  g.depth_ = depth;
  g.nodes_.assign(1, Node{Kind::full, 0});
  g.finalize();
  return g;
}

namespace {

// Recursive builder over a Morton-sorted unique cell range.
struct CellBuilder {
  int dim;
  int depth;
  const std::vector<std::uint64_t>* codes;
  std::vector<GridSet::Node>* nodes;

  GridSet::Node build(std::size_t lo, std::size_t hi, int level) {
    if (lo == hi) return {GridSet::Kind::empty, 0};
    int rem = depth - level;
    if (std::uint64_t(hi - lo) == (std::uint64_t(1) << (dim * rem)))
      return {GridSet::Kind::full, 0};
    expect(rem > 0, "cell builder: duplicate cells at leaf level");
    int shift = dim * (rem - 1);
    GridSet::Node kids[8];
    std::size_t at = lo;
    for (unsigned o = 0; o < (1u << dim); ++o) {
      std::size_t end = at;
      while (end < hi && (((*codes)[end] >> shift) & ((1u << dim) - 1)) == o) ++end;
      kids[o] = build(at, end, level + 1);
      at = end;
    }
    expect(at == hi, "cell builder: range not consumed");
    std::uint32_t c0 = std::uint32_t(nodes->size());
    for (unsigned o = 0; o < (1u << dim); ++o) nodes->push_back(kids[o]);
    return {GridSet::Kind::mixed, c0};
  }
};

}  // namespace

GridSet GridSet::from_cells(int dim, int depth, std::vector<Corner> cells) {
  check_dims(dim, depth);
  std::int64_t n = std::int64_t(1) << depth;
  std::vector<std::uint64_t> codes;
  codes.reserve(cells.size());
  for (const auto& m : cells) {
    for (int i = 0; i < dim; ++i)
      require(m[i] >= 0 && m[i] < n, "from_cells: cell outside the unit box");
    codes.push_back(morton(m, dim, depth));
  }
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());

  GridSet g;
  g.dim_ = dim;
  g.depth_ = depth;
  g.nodes_.assign(1, Node{Kind::empty, 0});
  CellBuilder b{dim, depth, &codes, &g.nodes_};
  g.nodes_[0] = b.build(0, codes.size(), 0);
  g.finalize();
  return g;
}

void GridSet::finalize() {
  // Builders append children blocks in no particular index order, so walk
  // the tree instead of sweeping indices.
  cell_counts_.assign(nodes_.size(), 0);
  node_depths_.assign(nodes_.size(), 0);

  struct Walk {
    GridSet* g;
    std::uint64_t run(std::uint32_t idx, int level) {
      g->node_depths_[idx] = std::uint8_t(level);
      const Node& nd = g->nodes_[idx];
      std::uint64_t c = 0;
      switch (nd.kind) {
        case Kind::empty: break;
        case Kind::full: c = std::uint64_t(1) << (g->dim_ * (g->depth_ - level)); break;
        case Kind::mixed:
          for (unsigned o = 0; o < (1u << g->dim_); ++o) c += run(nd.child0 + o, level + 1);
          break;
      }
      g->cell_counts_[idx] = c;
      return c;
    }
  };
  Walk{this}.run(0, 0);
}

double GridSet::measure() const {
  return std::ldexp(double(cell_count()), -dim_ * depth_);
}

GridSet::Kind GridSet::cube_state(const CubeIndex& q) const {
  require(q.dim == dim_, "cube_state: dimension mismatch");
  // Locate the ancestor path of q from the root.
  std::int64_t span = std::int64_t(1) << q.depth;  // cells per axis at q.depth
  for (int i = 0; i < dim_; ++i)
    if (q.corner[i] < 0 || q.corner[i] >= span) return Kind::empty;

  std::uint32_t idx = 0;
  int level = 0;
  while (true) {
    const Node& nd = nodes_[idx];
    if (nd.kind != Kind::mixed) return nd.kind;
    if (level == q.depth) return Kind::mixed;
    if (level == depth_) return nd.kind;  // unreachable for canonical trees
    unsigned o = 0;
    int shift = q.depth - level - 1;
    for (int i = 0; i < dim_; ++i) o |= unsigned((q.corner[i] >> shift) & 1) << i;
    idx = nd.child0 + o;
    ++level;
  }
}

bool GridSet::cell_occupied(const Corner& cell) const {
  CubeIndex q{dim_, depth_, cell};
  return cube_state(q) != Kind::empty;
}

bool GridSet::point_occupied(const Point& x) const {
  double h = pow2(-depth_);
  Corner lo{}, hi{};
  for (int i = 0; i < dim_; ++i) {
    double s = x[i] / h;
    std::int64_t f = std::int64_t(std::floor(s));
    lo[i] = (double(f) == s) ? f - 1 : f;
    hi[i] = f;
  }
  // Unused axes have lo == hi == 0, so their loops run exactly once.
  Corner c{};
  std::int64_t n = cells_per_axis();
  for (c[0] = lo[0]; c[0] <= hi[0]; ++c[0])
    for (c[1] = lo[1]; c[1] <= hi[1]; ++c[1])
      for (c[2] = lo[2]; c[2] <= hi[2]; ++c[2]) {
        bool in = true;
        for (int i = 0; i < dim_; ++i)
          if (c[i] < 0 || c[i] >= n) in = false;
        if (in && cell_occupied(c)) return true;
      }
  return false;
}

namespace {

struct CountCtx {
  const GridSet* g;
  CellBox box;

  std::uint64_t run(std::uint32_t idx, GridSet::Kind kind, int level, const Corner& corner) {
    int rem = g->depth() - level;
    CellBox nb{g->dim(), {}, {}};
    for (int i = 0; i < g->dim(); ++i) {
      nb.lo[i] = corner[i] << rem;
      nb.hi[i] = (corner[i] + 1) << rem;
    }
    CellBox in = intersect(nb, box);
    if (in.empty()) return 0;
    if (kind == GridSet::Kind::empty) return 0;
    if (kind == GridSet::Kind::full) return std::uint64_t(in.volume_cells());
    bool whole = true;
    for (int i = 0; i < g->dim(); ++i)
      if (in.lo[i] != nb.lo[i] || in.hi[i] != nb.hi[i]) whole = false;
    if (whole) return g->node_cell_counts()[idx];
    std::uint64_t s = 0;
    const auto& nd = g->nodes()[idx];
    for (unsigned o = 0; o < (1u << g->dim()); ++o) {
      Corner cc{};
      for (int i = 0; i < g->dim(); ++i) cc[i] = 2 * corner[i] + ((o >> i) & 1);
      s += run(nd.child0 + o, g->nodes()[nd.child0 + o].kind, level + 1, cc);
    }
    return s;
  }
};

}  // namespace

std::uint64_t GridSet::count_in_box(const CellBox& b) const {
  CellBox grid{dim_, {}, {}};
  for (int i = 0; i < dim_; ++i) {
    grid.lo[i] = 0;
    grid.hi[i] = cells_per_axis();
  }
  CellBox clipped = intersect(grid, b);
  if (clipped.empty()) return 0;
  CountCtx ctx{this, clipped};
  return ctx.run(0, nodes_[0].kind, 0, Corner{});
}

void GridSet::visit_cells(const std::function<void(const Corner&)>& fn) const {
  if (cell_count() > 50'000'000)
    throw resource_error("visit_cells: too many occupied cells to enumerate");

  struct V {
    const GridSet* g;
    const std::function<void(const Corner&)>* fn;
    void run(GridSet::Kind kind, std::uint32_t idx, int level, const Corner& corner) {
      if (kind == Kind::empty) return;
      int rem = g->depth() - level;
      if (kind == Kind::full) {
        Corner lo{}, c{};
        for (int i = 0; i < g->dim(); ++i) lo[i] = corner[i] << rem;
        std::int64_t span = std::int64_t(1) << rem;
        c = lo;
        while (true) {
          (*fn)(c);
          int axis = 0;
          while (axis < g->dim() && ++c[axis] == lo[axis] + span) {
            c[axis] = lo[axis];
            ++axis;
          }
          if (axis == g->dim()) break;
        }
        return;
      }
      const auto& nd = g->nodes()[idx];
      for (unsigned o = 0; o < (1u << g->dim()); ++o) {
        Corner cc{};
        for (int i = 0; i < g->dim(); ++i) cc[i] = 2 * corner[i] + ((o >> i) & 1);
        run(g->nodes()[nd.child0 + o].kind, nd.child0 + o, level + 1, cc);
      }
    }
  } v{this, &fn};
  v.run(nodes_[0].kind, 0, 0, Corner{});
}

std::vector<Corner> GridSet::cells() const {
  std::vector<Corner> out;
  out.reserve(cell_count());
  visit_cells([&](const Corner& c) { out.push_back(c); });
  std::sort(out.begin(), out.end(), [this](const Corner& a, const Corner& b) {
    for (int i = 0; i < dim_; ++i)
      if (a[i] != b[i]) return a[i] < b[i];
    return false;
  });
  return out;
}

std::vector<Corner> GridSet::occupied_nodes_at_depth(int k) const {
  require(k >= 0 && k <= depth_, "occupied_nodes_at_depth: depth out of range");
  std::vector<Corner> out;

  struct V {
    const GridSet* g;
    int k;
    std::vector<Corner>* out;
    void run(GridSet::Kind kind, std::uint32_t idx, int level, const Corner& corner) {
      if (kind == Kind::empty) return;
      if (level == k) {
        out->push_back(corner);
        return;
      }
      if (kind == Kind::full) {
        if ((k - level) * g->dim() > 24)
          throw resource_error("occupied_nodes_at_depth: full-node expansion too large");
        for (unsigned o = 0; o < (1u << g->dim()); ++o) {
          Corner cc{};
          for (int i = 0; i < g->dim(); ++i) cc[i] = 2 * corner[i] + ((o >> i) & 1);
          run(Kind::full, idx, level + 1, cc);
        }
        return;
      }
      const auto& nd = g->nodes()[idx];
      for (unsigned o = 0; o < (1u << g->dim()); ++o) {
        Corner cc{};
        for (int i = 0; i < g->dim(); ++i) cc[i] = 2 * corner[i] + ((o >> i) & 1);
        run(g->nodes()[nd.child0 + o].kind, nd.child0 + o, level + 1, cc);
      }
    }
  } v{this, k, &out};
  v.run(nodes_[0].kind, 0, 0, Corner{});
  std::sort(out.begin(), out.end(), [this](const Corner& a, const Corner& b) {
    for (int i = 0; i < dim_; ++i)
      if (a[i] != b[i]) return a[i] < b[i];
    return false;
  });
  return out;
}

namespace {

struct MergeCtx {
  int dim;
  int depth;
  int op;  // 0 union, 1 intersection, 2 difference
  std::vector<GridSet::Node>* nodes;

  struct Ref {
    GridSet::Kind kind;
    std::uint32_t child0;
    const GridSet* tree;
  };

  Ref child_of(const Ref& r, unsigned o) const {
    if (r.kind != GridSet::Kind::mixed) return {r.kind, 0, r.tree};
    const auto& nd = r.tree->nodes()[r.child0 + o];
    // child0 of a mixed entry addresses its own children block
    return {nd.kind, nd.child0, r.tree};
  }

  GridSet::Node copy_subtree(const Ref& r) {
    if (r.kind != GridSet::Kind::mixed) return {r.kind, 0};
    GridSet::Node kids[8];
    for (unsigned o = 0; o < (1u << dim); ++o) kids[o] = copy_subtree(child_of(r, o));
    std::uint32_t c0 = std::uint32_t(nodes->size());
    for (unsigned o = 0; o < (1u << dim); ++o) nodes->push_back(kids[o]);
    return {GridSet::Kind::mixed, c0};
  }

  GridSet::Node merge(const Ref& ra, const Ref& rb, int level) {
    using K = GridSet::Kind;
    // shortcuts
    if (op == 0) {
      if (ra.kind == K::full || rb.kind == K::empty) return resolve(ra);
      if (rb.kind == K::full || ra.kind == K::empty) return resolve(rb);
    } else if (op == 1) {
      if (ra.kind == K::empty || rb.kind == K::full) return resolve(ra);
      if (rb.kind == K::empty || ra.kind == K::full) return resolve(rb);
    } else {
      if (ra.kind == K::empty || rb.kind == K::empty) return resolve(ra);
      if (rb.kind == K::full) return {K::empty, 0};
    }
    expect(level < depth, "set algebra: leaves must resolve");
    GridSet::Node kids[8];
    bool all_empty = true, all_full = true;
    for (unsigned o = 0; o < (1u << dim); ++o) {
      kids[o] = merge(child_of(ra, o), child_of(rb, o), level + 1);
      all_empty = all_empty && kids[o].kind == K::empty;
      all_full = all_full && kids[o].kind == K::full;
    }
    if (all_empty) return {K::empty, 0};
    if (all_full) return {K::full, 0};
    std::uint32_t c0 = std::uint32_t(nodes->size());
    for (unsigned o = 0; o < (1u << dim); ++o) nodes->push_back(kids[o]);
    return {K::mixed, c0};
  }

  GridSet::Node resolve(const Ref& r) { return copy_subtree(r); }
};

std::vector<GridSet::Node> merged_nodes(const GridSet& a, const GridSet& b, int depth, int op) {
  std::vector<GridSet::Node> nodes(1);
  MergeCtx ctx{a.dim(), depth, op, &nodes};
  MergeCtx::Ref ra{a.nodes()[0].kind, a.nodes()[0].child0, &a};
  MergeCtx::Ref rb{b.nodes()[0].kind, b.nodes()[0].child0, &b};
  nodes[0] = ctx.merge(ra, rb, 0);
  return nodes;
}

}  // namespace

GridSet GridSet::from_nodes(int dim, int depth, std::vector<Node> nodes) {
  GridSet g(dim, depth);
  g.nodes_ = std::move(nodes);
  g.finalize();
  return g;
}

// The coarser operand refines implicitly: full/empty nodes act as constant
// subtrees at any depth, so the result lives at the common refinement.
GridSet set_union(const GridSet& a, const GridSet& b) {
  require(a.dim() == b.dim(), "set algebra: dimension mismatch");
  int depth = std::max(a.depth(), b.depth());
  return GridSet::from_nodes(a.dim(), depth, merged_nodes(a, b, depth, 0));
}

GridSet set_intersection(const GridSet& a, const GridSet& b) {
  require(a.dim() == b.dim(), "set algebra: dimension mismatch");
  int depth = std::max(a.depth(), b.depth());
  return GridSet::from_nodes(a.dim(), depth, merged_nodes(a, b, depth, 1));
}

GridSet set_difference(const GridSet& a, const GridSet& b) {
  require(a.dim() == b.dim(), "set algebra: dimension mismatch");
  int depth = std::max(a.depth(), b.depth());
  return GridSet::from_nodes(a.dim(), depth, merged_nodes(a, b, depth, 2));
}

GridRegion cube_region(int dim, int depth, const CubeIndex& q) {
  require(q.dim == dim, "cube_region: dimension mismatch");
  require(q.depth <= depth, "cube_region: cube deeper than the grid");
  for (int i = 0; i < dim; ++i)
    require(q.corner[i] >= 0 && q.corner[i] < (std::int64_t(1) << q.depth),
            "cube_region: cube outside the unit box");
  // Path of mixed nodes down to q, a full node there.
  std::vector<GridSet::Node> nodes(1);
  std::uint32_t at = 0;
  for (int level = 0; level < q.depth; ++level) {
    std::uint32_t c0 = std::uint32_t(nodes.size());
    for (unsigned o = 0; o < (1u << dim); ++o) nodes.push_back({GridSet::Kind::empty, 0});
    nodes[at] = {GridSet::Kind::mixed, c0};
    unsigned o = 0;
    int shift = q.depth - level - 1;
    for (int i = 0; i < dim; ++i) o |= unsigned((q.corner[i] >> shift) & 1) << i;
    at = c0 + o;
  }
  nodes[at] = {GridSet::Kind::full, 0};
  return GridSet::from_nodes(dim, depth, std::move(nodes));
}

namespace {

struct BoxRegionBuilder {
  int dim;
  int depth;
  CellBox box;
  std::vector<GridSet::Node>* nodes;

  GridSet::Node build(const Corner& corner, int level) {
    int rem = depth - level;
    CellBox nb{dim, {}, {}};
    for (int i = 0; i < dim; ++i) {
      nb.lo[i] = corner[i] << rem;
      nb.hi[i] = (corner[i] + 1) << rem;
    }
    CellBox in = intersect(nb, box);
    if (in.empty()) return {GridSet::Kind::empty, 0};
    bool whole = true;
    for (int i = 0; i < dim; ++i)
      if (in.lo[i] != nb.lo[i] || in.hi[i] != nb.hi[i]) whole = false;
    if (whole) return {GridSet::Kind::full, 0};
    GridSet::Node kids[8];
    for (unsigned o = 0; o < (1u << dim); ++o) {
      Corner cc{};
      for (int i = 0; i < dim; ++i) cc[i] = 2 * corner[i] + ((o >> i) & 1);
      kids[o] = build(cc, level + 1);
    }
    std::uint32_t c0 = std::uint32_t(nodes->size());
    for (unsigned o = 0; o < (1u << dim); ++o) nodes->push_back(kids[o]);
    return {GridSet::Kind::mixed, c0};
  }
};

}  // namespace

GridRegion box_region(int dim, int depth, const CellBox& cells) {
  require(cells.dim == dim, "box_region: dimension mismatch");
  GridSet g(dim, depth);
  std::int64_t n = std::int64_t(1) << depth;
  CellBox grid{dim, {}, {}};
  for (int i = 0; i < dim; ++i) grid.hi[i] = n;
  CellBox in = intersect(cells, grid);
  if (in.empty()) return g;
  std::vector<GridSet::Node> nodes(1);
  BoxRegionBuilder b{dim, depth, in, &nodes};
  nodes[0] = b.build(Corner{}, 0);
  return GridSet::from_nodes(dim, depth, std::move(nodes));
}

CellBox cube_cell_box(int grid_depth, const CubeIndex& q) {
  require(q.depth <= grid_depth, "cube_cell_box: cube deeper than the grid");
  int rem = grid_depth - q.depth;
  CellBox b{q.dim, {}, {}};
  for (int i = 0; i < q.dim; ++i) {
    b.lo[i] = q.corner[i] << rem;
    b.hi[i] = (q.corner[i] + 1) << rem;
  }
  return b;
}

CellBox outer_cell_box(int dim, int grid_depth, const double* lo, const double* hi) {
  double h = pow2(-grid_depth);
  std::int64_t n = std::int64_t(1) << grid_depth;
  CellBox b{dim, {}, {}};
  for (int i = 0; i < dim; ++i) {
    double s = lo[i] / h;
    double c = std::ceil(s);
    std::int64_t clo = (c == s) ? std::int64_t(c) - 1 : std::int64_t(std::floor(s));
    std::int64_t chi = std::int64_t(std::floor(hi[i] / h));  // inclusive
    b.lo[i] = std::max<std::int64_t>(0, clo);
    b.hi[i] = std::min<std::int64_t>(n, chi + 1);
  }
  return b;
}

}  // namespace dhc
