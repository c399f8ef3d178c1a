#include "dhc/content.hpp"

#include <algorithm>
#include <cmath>

#ifdef DHC_HAVE_OPENMP
#include <omp.h>
#endif

namespace dhc {

namespace {

void check_d(const GridSet& s, double d) {
  require(d >= 0.0 && d <= double(s.dim()), "content: d must lie in [0, n]");
}

// cost of one node given its children's costs; ties go to self
struct NodeCost {
  double cost;
  unsigned char take_self;
};

NodeCost combine(double self, double children_sum) {
  if (eq_rel(children_sum, self)) return {std::min(self, children_sum), 1};
  if (self < children_sum) return {self, 1};
  return {children_sum, 0};
}

struct TableBuilder {
  const GridSet* s;
  double d;
  ContentTable* t;

  double run(std::uint32_t idx, int level) {
    const auto& nd = s->nodes()[idx];
    switch (nd.kind) {
      case GridSet::Kind::empty:
        t->cost[idx] = 0.0;
        t->take_self[idx] = 0;
        return 0.0;
      case GridSet::Kind::full:
        // solid cube: self cover is optimal for every d <= n
        t->cost[idx] = side_pow(level, d);
        t->take_self[idx] = 1;
        return t->cost[idx];
      case GridSet::Kind::mixed: break;
    }
    double sum = 0.0;
    for (unsigned o = 0; o < (1u << s->dim()); ++o) sum += run(nd.child0 + o, level + 1);
    NodeCost nc = combine(side_pow(level, d), sum);
    t->cost[idx] = nc.cost;
    t->take_self[idx] = nc.take_self;
    return nc.cost;
  }

#ifdef DHC_HAVE_OPENMP
  // identical arithmetic per node; tasks only change the schedule
  double run_tasks(std::uint32_t idx, int level) {
    const auto& nd = s->nodes()[idx];
    if (nd.kind != GridSet::Kind::mixed || level >= 3) return run(idx, level);
    unsigned width = 1u << s->dim();
    std::vector<double> part(width, 0.0);
    for (unsigned o = 0; o < width; ++o) {
#pragma omp task shared(part) firstprivate(o)
      part[o] = run_tasks(nd.child0 + o, level + 1);
    }
#pragma omp taskwait
    double sum = 0.0;
    for (unsigned o = 0; o < width; ++o) sum += part[o];
    NodeCost nc = combine(side_pow(level, d), sum);
    t->cost[idx] = nc.cost;
    t->take_self[idx] = nc.take_self;
    return nc.cost;
  }
#endif
};

ContentTable make_table(const GridSet& s, double d, bool parallel) {
  check_d(s, d);
  ContentTable t;
  t.dim = s.dim();
  t.depth = s.depth();
  t.d = d;
  t.set = &s;
  t.cost.assign(s.nodes().size(), 0.0);
  t.take_self.assign(s.nodes().size(), 0);
  TableBuilder b{&s, d, &t};
  if (parallel) {
#ifdef DHC_HAVE_OPENMP
#pragma omp parallel
#pragma omp single nowait
    b.run_tasks(0, 0);
#else
    b.run(0, 0);
#endif
  } else {
    b.run(0, 0);
  }
  return t;
}

}  // namespace

ContentTable build_content_table(const GridSet& s, double d) { return make_table(s, d, true); }

ContentTable build_content_table_serial(const GridSet& s, double d) {
  return make_table(s, d, false);
}

double dyadic_content(const ContentTable& t, const CubeIndex& q) {
  require(q.dim == t.dim, "content: dimension mismatch");
  std::int64_t span = std::int64_t(1) << q.depth;
  for (int i = 0; i < t.dim; ++i)
    if (q.corner[i] < 0 || q.corner[i] >= span) return 0.0;

  const GridSet& s = *t.set;
  std::uint32_t idx = 0;
  int level = 0;
  while (true) {
    switch (s.nodes()[idx].kind) {
      case GridSet::Kind::empty: return 0.0;
      case GridSet::Kind::full: return side_pow(q.depth, t.d);
      case GridSet::Kind::mixed: break;
    }
    if (level == q.depth) return t.cost[idx];
    unsigned o = 0;
    int shift = q.depth - level - 1;
    for (int i = 0; i < t.dim; ++i) o |= unsigned((q.corner[i] >> shift) & 1) << i;
    idx = s.nodes()[idx].child0 + o;
    ++level;
  }
}

double dyadic_content(const GridSet& s, const CubeIndex& q, double d) {
  return dyadic_content(build_content_table_serial(s, d), q);
}

double dyadic_content(const GridSet& s, double d) {
  return build_content_table_serial(s, d).root_cost();
}

namespace {

void extract_covering(const ContentTable& t, std::uint32_t idx, int level, const Corner& corner,
                      double eps, std::vector<CubeIndex>& out) {
  const GridSet& s = *t.set;
  const auto& nd = s.nodes()[idx];
  if (nd.kind == GridSet::Kind::empty) return;
  CubeIndex q{t.dim, level, corner};
  if (nd.kind == GridSet::Kind::full) {
    out.push_back(q);
    return;
  }
  bool take = eps == 0.0
                  ? bool(t.take_self[idx])
                  : side_pow(level, t.d) <=
                        (1.0 + eps) * t.cost[idx] * (1.0 + kContentRelTol);
  if (take) {
    out.push_back(q);
    return;
  }
  for (unsigned o = 0; o < (1u << t.dim); ++o) {
    Corner cc{};
    for (int i = 0; i < t.dim; ++i) cc[i] = 2 * corner[i] + ((o >> i) & 1);
    extract_covering(t, nd.child0 + o, level + 1, cc, eps, out);
  }
}

}  // namespace

CubeFamily optimal_covering(const ContentTable& t, const CubeIndex& q, double eps) {
  require(eps >= 0.0, "optimal_covering: eps must be >= 0");
  require(q.dim == t.dim, "optimal_covering: dimension mismatch");
  require(t.set->cube_meets_set(q), "optimal_covering: cube does not meet the set");

  // walk to q's node; a full or leaf-deep region degenerates to {q}
  const GridSet& s = *t.set;
  std::uint32_t idx = 0;
  int level = 0;
  while (level < q.depth) {
    const auto& nd = s.nodes()[idx];
    if (nd.kind != GridSet::Kind::mixed) break;
    unsigned o = 0;
    int shift = q.depth - level - 1;
    for (int i = 0; i < t.dim; ++i) o |= unsigned((q.corner[i] >> shift) & 1) << i;
    idx = nd.child0 + o;
    ++level;
  }
  if (level < q.depth || s.nodes()[idx].kind == GridSet::Kind::full)
    return make_family(t.dim, {q});

  std::vector<CubeIndex> members;
  extract_covering(t, idx, level, q.corner, eps, members);
  return make_family(t.dim, std::move(members));
}

bool is_thick(const ContentTable& t, const CubeIndex& q, const ThicknessQuery& tq) {
  require(tq.lambda > 0.0 && tq.lambda <= 1.0, "thickness: lambda must lie in (0, 1]");
  require(tq.d == t.d, "thickness: query exponent differs from the table");
  return geq_rel(dyadic_content(t, q), tq.lambda * side_pow(q.depth, t.d));
}

namespace {

struct WindowCtx {
  const ContentTable* t;
  CellBox win;

  // min-cost cover of the occupied cells inside the window under this node
  double run(std::uint32_t idx, GridSet::Kind kind, int level, const Corner& corner) {
    if (kind == GridSet::Kind::empty) return 0.0;
    const GridSet& s = *t->set;
    int rem = s.depth() - level;
    CellBox nb{s.dim(), {}, {}};
    for (int i = 0; i < s.dim(); ++i) {
      nb.lo[i] = corner[i] << rem;
      nb.hi[i] = (corner[i] + 1) << rem;
    }
    CellBox in = intersect(nb, win);
    if (in.empty()) return 0.0;
    bool whole = true;
    for (int i = 0; i < s.dim(); ++i)
      if (in.lo[i] != nb.lo[i] || in.hi[i] != nb.hi[i]) whole = false;
    if (whole) return kind == GridSet::Kind::full ? side_pow(level, t->d) : t->cost[idx];
    if (level == s.depth()) return side_pow(level, t->d);

    double sum = 0.0;
    for (unsigned o = 0; o < (1u << s.dim()); ++o) {
      Corner cc{};
      for (int i = 0; i < s.dim(); ++i) cc[i] = 2 * corner[i] + ((o >> i) & 1);
      if (kind == GridSet::Kind::full) {
        sum += run(0, GridSet::Kind::full, level + 1, cc);
      } else {
        std::uint32_t ci = s.nodes()[idx].child0 + o;
        sum += run(ci, s.nodes()[ci].kind, level + 1, cc);
      }
    }
    return std::min(side_pow(level, t->d), sum);
  }
};

}  // namespace

double window_content(const ContentTable& t, const GeomCube& w) {
  require(w.dim == t.dim, "window_content: dimension mismatch");
  require(w.half_side >= 0.0, "window_content: negative half-side");
  double lo[kMaxDim], hi[kMaxDim];
  for (int i = 0; i < w.dim; ++i) {
    lo[i] = w.lo(i);
    hi[i] = w.hi(i);
  }
  CellBox win = outer_cell_box(w.dim, t.depth, lo, hi);
  if (win.empty()) return 0.0;
  WindowCtx ctx{&t, win};
  return ctx.run(0, t.set->nodes()[0].kind, 0, Corner{});
}

bool is_thick(const ContentTable& t, const GeomCube& w, const ThicknessQuery& tq, bool dyadic) {
  require(tq.lambda > 0.0 && tq.lambda <= 1.0, "thickness: lambda must lie in (0, 1]");
  require(tq.d == t.d, "thickness: query exponent differs from the table");
  double threshold = tq.lambda * std::pow(w.side(), t.d);
  if (dyadic) return geq_rel(window_content(t, w), threshold);

  // conservative: certify via the shifted-grid lower bound for true content
  double lo[kMaxDim], hi[kMaxDim];
  for (int i = 0; i < w.dim; ++i) {
    lo[i] = w.lo(i);
    hi[i] = w.hi(i);
  }
  CellBox win = outer_cell_box(w.dim, t.depth, lo, hi);
  GridSet clipped = set_intersection(*t.set, box_region(t.dim, t.depth, win));
  auto [lower, upper] = hausdorff_content_bounds(clipped, CubeIndex{t.dim, 0, {}}, t.d);
  (void)upper;
  return geq_rel(lower, threshold);
}

namespace {

// Canonical tree of the set translated by o half-cells and embedded at half
// scale (depth K+2), built from box queries so no cell list is materialized.
struct ShiftBuilder {
  const GridSet* s;
  int dim;
  int K;
  Corner off;  // 0/1 half-cells per axis
  std::vector<GridSet::Node>* nodes;

  // state of the translated set on the half-cell box [a, b)
  GridSet::Kind probe(const Corner& a, const Corner& b) const {
    Corner alo{}, ahi{};
    bool inside = true;
    for (int i = 0; i < dim; ++i) {
      std::int64_t lo = a[i] - off[i], hi = b[i] - off[i];  // un-translate
      if (lo < 0 || hi > (std::int64_t(2) << K)) inside = false;
      lo = std::max<std::int64_t>(lo, 0);
      hi = std::min<std::int64_t>(hi, std::int64_t(2) << K);
      if (lo >= hi) return GridSet::Kind::empty;
      alo[i] = floor_div(lo, 2);
      ahi[i] = floor_div(hi - 1, 2) + 1;
    }
    CellBox cells{dim, alo, ahi};
    std::uint64_t cnt = s->count_in_box(cells);
    if (cnt == 0) return GridSet::Kind::empty;
    if (inside && cnt == std::uint64_t(cells.volume_cells())) return GridSet::Kind::full;
    return GridSet::Kind::mixed;
  }

  GridSet::Node build(const Corner& a, int level) {
    int rem = (K + 2) - level;
    Corner b{};
    for (int i = 0; i < dim; ++i) b[i] = a[i] + (std::int64_t(1) << rem);
    GridSet::Kind k = probe(a, b);
    if (k != GridSet::Kind::mixed || rem == 0)
      return {k == GridSet::Kind::mixed ? GridSet::Kind::full : k, 0};
    GridSet::Node kids[8];
    for (unsigned o = 0; o < (1u << dim); ++o) {
      Corner ca{};
      for (int i = 0; i < dim; ++i) ca[i] = a[i] + (((o >> i) & 1) << (rem - 1));
      kids[o] = build(ca, level + 1);
    }
    bool all_e = true, all_f = true;
    for (unsigned o = 0; o < (1u << dim); ++o) {
      all_e = all_e && kids[o].kind == GridSet::Kind::empty;
      all_f = all_f && kids[o].kind == GridSet::Kind::full;
    }
    if (all_e) return {GridSet::Kind::empty, 0};
    if (all_f) return {GridSet::Kind::full, 0};
    std::uint32_t c0 = std::uint32_t(nodes->size());
    for (unsigned o = 0; o < (1u << dim); ++o) nodes->push_back(kids[o]);
    return {GridSet::Kind::mixed, c0};
  }
};

double shifted_dyadic_content(const GridSet& s, const Corner& off, double d) {
  std::vector<GridSet::Node> nodes(1);
  ShiftBuilder b{&s, s.dim(), s.depth(), off, &nodes};
  nodes[0] = b.build(Corner{}, 0);
  GridSet embedded = GridSet::from_nodes(s.dim(), s.depth() + 2, std::move(nodes));
  // embedded cubes are half scale: content transforms by 2^d
  return build_content_table_serial(embedded, d).root_cost() * std::exp2(d);
}

}  // namespace

std::pair<double, double> hausdorff_content_bounds(const GridSet& s, const CubeIndex& q,
                                                   double d) {
  check_d(s, d);
  GridSet clipped = q.depth == 0 && q.corner == Corner{}
                        ? s
                        : set_intersection(s, cube_region(s.dim(), s.depth(), q));
  double upper = dyadic_content(clipped, d);
  if (clipped.empty()) return {0.0, 0.0};

  double best = 0.0;
  for (unsigned o = 0; o < (1u << s.dim()); ++o) {
    Corner off{};
    for (int i = 0; i < s.dim(); ++i) off[i] = (o >> i) & 1;
    best = std::max(best, shifted_dyadic_content(clipped, off, d));
  }
  return {best * std::exp2(-double(s.dim())), upper};
}

double lcr_lambda(const GridSet& s, double d, int min_depth, int max_depth) {
  check_d(s, d);
  require(!s.empty(), "lcr_lambda: empty set");
  require(0 <= min_depth && min_depth <= max_depth && max_depth <= s.depth(),
          "lcr_lambda: bad depth range");
  ContentTable t = build_content_table(s, d);
  double worst = std::numeric_limits<double>::infinity();
  auto nodes = s.occupied_nodes_at_depth(max_depth);
  for (const auto& m : nodes) {
    Point x{};
    for (int i = 0; i < s.dim(); ++i)
      x[i] = std::ldexp(double(2 * m[i] + 1), -(max_depth + 1));
    for (int k = min_depth; k <= max_depth; ++k) {
      double l = pow2(-k);
      double ratio = window_content(t, GeomCube{s.dim(), x, l}) / std::pow(l, d);
      worst = std::min(worst, ratio);
      if (worst == 0.0) return 0.0;
    }
  }
  return worst;
}

}  // namespace dhc
