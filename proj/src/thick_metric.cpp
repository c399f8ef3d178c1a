#include "dhc/thick_metric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace dhc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int floor_log2(std::int64_t v) { return int(std::bit_width(std::uint64_t(v))) - 1; }

// Running sums along each axis over a (width)^dim point lattice, turning
// per-point seeds into box-corner prefix values.
template <typename T>
void axis_prefix(std::vector<T>& p, const std::int64_t* stride, int dim, std::int64_t width) {
  for (int axis = 0; axis < dim; ++axis) {
    const std::int64_t s = stride[axis];
    const std::int64_t n = std::int64_t(p.size());
    for (std::int64_t idx = 0; idx < n; ++idx)
      if ((idx / s) % width != 0) p[std::size_t(idx)] += p[std::size_t(idx - s)];
  }
}

// Inclusion-exclusion over the 2^dim corners of [lo, hi). Coordinates must
// already lie inside the lattice.
template <typename T>
std::int64_t box_sum(const std::vector<T>& p, const std::int64_t* stride, int dim,
                     const Corner& lo, const Corner& hi) {
  std::int64_t total = 0;
  for (unsigned mask = 0; mask < (1u << dim); ++mask) {
    std::int64_t idx = 0;
    int bits = 0;
    for (int i = 0; i < dim; ++i) {
      const bool low = (mask >> unsigned(i)) & 1u;
      bits += int(low);
      idx += (low ? lo[i] : hi[i]) * stride[i];
    }
    const std::int64_t v = std::int64_t(p[std::size_t(idx)]);
    total += (bits & 1) ? -v : v;
  }
  return total;
}

// Odometer over the inclusive box [lo, hi]; stops early when fn returns true.
template <typename Fn>
bool for_each_corner(int dim, const Corner& lo, const Corner& hi, Fn&& fn) {
  for (int i = 0; i < dim; ++i)
    if (lo[i] > hi[i]) return false;
  Corner c = lo;
  for (;;) {
    if (fn(c)) return true;
    int axis = 0;
    while (axis < dim) {
      if (c[axis] < hi[axis]) {
        ++c[axis];
        break;
      }
      c[axis] = lo[axis];
      ++axis;
    }
    if (axis == dim) return false;
  }
}

}  // namespace

ThickScan::ThickScan(const GridSet& s, double d) : table_(build_content_table(s, d)) {
  const int dim = table_.dim;
  const int depth = table_.depth;
  if (depth > field_depth_cap(dim))
    throw resource_error("thick scan: grid deeper than the per-cell budget for this dimension");
  const std::int64_t b = std::int64_t(1) << depth;
  std::int64_t points = 1;
  for (int i = 0; i < dim; ++i) {
    stride_[i] = points;
    points *= b + 1;
  }
  prefix_.assign(std::size_t(points), 0u);
  std::int64_t shift = 0;
  for (int i = 0; i < dim; ++i) shift += stride_[i];
  s.visit_cells([&](const Corner& c) {
    std::int64_t idx = shift;
    for (int i = 0; i < dim; ++i) idx += c[i] * stride_[i];
    prefix_[std::size_t(idx)] += 1u;
  });
  axis_prefix(prefix_, stride_, dim, b + 1);

  // Best content-to-side^d ratio per dyadic depth. Mixed nodes carry their
  // table cost; a full node makes every deeper scale ratio-1 exactly.
  max_ratio_.assign(std::size_t(depth) + 1, 0.0);
  const auto& nodes = s.nodes();
  const auto& levels = s.node_depths();
  int first_full = depth + 1;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const int k = int(levels[i]);
    if (nodes[i].kind == GridSet::Kind::full)
      first_full = std::min(first_full, k);
    else if (nodes[i].kind == GridSet::Kind::mixed)
      max_ratio_[std::size_t(k)] =
          std::max(max_ratio_[std::size_t(k)], table_.cost[i] / side_pow(k, table_.d));
  }
  for (int k = first_full; k <= depth; ++k)
    max_ratio_[std::size_t(k)] = std::max(max_ratio_[std::size_t(k)], 1.0);
}

std::uint64_t ThickScan::count(const Corner& lo, const Corner& hi) const {
  const std::int64_t b = std::int64_t(1) << table_.depth;
  Corner l{}, u{};
  for (int i = 0; i < table_.dim; ++i) {
    l[i] = std::clamp<std::int64_t>(lo[i], 0, b);
    u[i] = std::clamp<std::int64_t>(hi[i], 0, b);
    if (l[i] >= u[i]) return 0;
  }
  return std::uint64_t(box_sum(prefix_, stride_, table_.dim, l, u));
}

bool ThickScan::scale_possible(int k, double lambda) const {
  require(k >= 0 && k <= table_.depth, "thick scan: scale out of range");
  double p3 = 1.0;
  for (int i = 0; i < table_.dim; ++i) p3 *= 3.0;
  return geq_rel(max_ratio_[std::size_t(k)] * p3, lambda);
}

bool ThickScan::window_passes(const Corner& a, std::int64_t j, double thr) const {
  const double h = pow2(-table_.depth);
  GeomCube w{table_.dim, {}, 0.5 * double(j) * h};
  for (int i = 0; i < table_.dim; ++i) w.center[i] = (double(a[i]) + 0.5 * double(j)) * h;
  return geq_rel(window_content(table_, w), thr);
}

bool ThickScan::thick(const Corner& a, std::int64_t j, double lambda) const {
  require(j >= 1, "anchored cube: side must be at least one cell");
  require(lambda > 0.0 && lambda <= 1.0, "anchored cube: lambda must lie in (0, 1]");
  const int dim = table_.dim;
  const int depth = table_.depth;
  const std::int64_t b = std::int64_t(1) << depth;
  const double h = pow2(-depth);
  const double thr = lambda * std::pow(double(j) * h, table_.d);

  Corner wlo{}, whi{};
  for (int i = 0; i < dim; ++i) {
    wlo[i] = std::max<std::int64_t>(a[i] - 1, 0);
    whi[i] = std::min<std::int64_t>(a[i] + j + 1, b);
    if (wlo[i] >= whi[i]) return false;
  }
  // Cells alone bound the content from above: too few cells, not thick.
  const std::uint64_t cells = count(wlo, whi);
  if (cells == 0) return false;
  if (!geq_rel(double(cells) * side_pow(depth, table_.d), thr)) return false;

  // The deepest dyadic cube holding the whole window bounds it next.
  int k = depth;
  for (int i = 0; i < dim; ++i) {
    const std::uint64_t x = std::uint64_t(wlo[i]) ^ std::uint64_t(whi[i] - 1);
    k = std::min(k, depth - int(std::bit_width(x)));
  }
  Corner qc{};
  for (int i = 0; i < dim; ++i) qc[i] = wlo[i] >> (depth - k);
  if (!geq_rel(dyadic_content(table_, CubeIndex{dim, k, qc}), thr)) return false;

  // One aligned block inside the window certifies thickness without the
  // exact cover: content is monotone under adding cells.
  std::int64_t ext = whi[0] - wlo[0];
  for (int i = 1; i < dim; ++i) ext = std::min(ext, whi[i] - wlo[i]);
  const std::int64_t m = std::int64_t(std::bit_floor(std::uint64_t(ext + 1) / 2));
  if (m >= 1) {
    const int km = depth - floor_log2(m);
    Corner bc{};
    bool fits = true;
    for (int i = 0; i < dim; ++i) {
      const std::int64_t c0 = ceil_div(wlo[i], m) * m;
      if (c0 + m > whi[i]) {
        fits = false;
        break;
      }
      bc[i] = c0 / m;
    }
    if (fits && geq_rel(dyadic_content(table_, CubeIndex{dim, km, bc}), thr)) return true;
  }

  return window_passes(a, j, thr);
}

std::int64_t ThickScan::min_thick_side_cells(const Point& x, double lambda,
                                             Corner* anchor) const {
  require(lambda > 0.0 && lambda <= 1.0, "thickness: lambda must lie in (0, 1]");
  const int dim = table_.dim;
  const int depth = table_.depth;
  const std::int64_t b = std::int64_t(1) << depth;
  const double h = pow2(-depth);
  bool in_box = true;
  for (int i = 0; i < dim; ++i) in_box = in_box && x[i] >= 0.0 && x[i] <= 1.0;
  if (in_box && table_.set->point_occupied(x)) return 0;

  Corner top{}, bot{};
  for (int i = 0; i < dim; ++i) {
    top[i] = std::int64_t(std::floor(x[i] / h));  // a <= x/h
    bot[i] = std::int64_t(std::ceil(x[i] / h));   // a + j >= x/h
  }
  for (std::int64_t j = 1; j <= b;) {
    const int oct = floor_log2(j);
    if (!scale_possible(depth - oct, lambda)) {
      j = std::int64_t(1) << (oct + 1);
      continue;
    }
    Corner lo{}, hi{};
    for (int i = 0; i < dim; ++i) {
      lo[i] = bot[i] - j;
      hi[i] = top[i];
    }
    Corner found{};
    const bool hit = for_each_corner(dim, lo, hi, [&](const Corner& a) {
      if (!thick(a, j, lambda)) return false;
      found = a;
      return true;
    });
    if (hit) {
      if (anchor) *anchor = found;
      return j;
    }
    ++j;
  }
  return -1;
}

std::int64_t ThickScan::min_thick_side_cells(const Point& x, const Point& y, double lambda,
                                             Corner* anchor) const {
  require(lambda > 0.0 && lambda <= 1.0, "thickness: lambda must lie in (0, 1]");
  const int dim = table_.dim;
  const int depth = table_.depth;
  const std::int64_t b = std::int64_t(1) << depth;
  const double h = pow2(-depth);
  Corner top{}, bot{};
  std::int64_t span = 1;
  for (int i = 0; i < dim; ++i) {
    top[i] = std::int64_t(std::floor(std::min(x[i], y[i]) / h));
    bot[i] = std::int64_t(std::ceil(std::max(x[i], y[i]) / h));
    span = std::max(span, bot[i] - top[i]);
  }
  for (std::int64_t j = span; j <= b;) {
    const int oct = floor_log2(j);
    if (!scale_possible(depth - oct, lambda)) {
      j = std::int64_t(1) << (oct + 1);
      continue;
    }
    Corner lo{}, hi{};
    for (int i = 0; i < dim; ++i) {
      lo[i] = bot[i] - j;
      hi[i] = top[i];
    }
    Corner found{};
    const bool hit = for_each_corner(dim, lo, hi, [&](const Corner& a) {
      if (!thick(a, j, lambda)) return false;
      found = a;
      return true;
    });
    if (hit) {
      if (anchor) *anchor = found;
      return j;
    }
    ++j;
  }
  return -1;
}

int field_depth_cap(int dim) {
  require(dim >= 1 && dim <= kMaxDim, "distance field: dimension must be 1, 2, or 3");
  constexpr int caps[kMaxDim + 1] = {0, 12, 8, 5};
  return caps[dim];
}

std::int64_t pseudometric_cell_cap() { return 1024; }

namespace {

// Round-based minimum-side sweep. value holds 0 on occupied cells, +inf
// elsewhere; anchored thick cubes of side j cells paint j*h over the cells
// they cover, ascending j, so every cell keeps its first (smallest) side.
// Rounds where no dyadic scale can support a thick cube are skipped whole.
void min_side_sweep(const ThickScan& scan, double lambda, std::int64_t j_cap,
                    std::vector<double>& value, bool parallel) {
  const int dim = scan.dim();
  const int depth = scan.depth();
  const std::int64_t b = std::int64_t(1) << depth;
  std::int64_t cells = 1, points = 1;
  std::int64_t pstride[kMaxDim]{};
  for (int i = 0; i < dim; ++i) {
    pstride[i] = points;
    cells *= b;
    points *= b + 1;
  }
  std::int64_t seed_shift = 0;
  for (int i = 0; i < dim; ++i) seed_shift += pstride[i];
  const double h = pow2(-depth);

  const auto point_of = [&](std::int64_t cell) {
    std::int64_t idx = 0;
    for (int i = 0; i < dim; ++i) {
      idx += (cell % b) * pstride[i];
      cell /= b;
    }
    return idx;
  };

  std::vector<std::uint32_t> open(static_cast<std::size_t>(points));
  std::vector<std::int32_t> stamp(static_cast<std::size_t>(points));
  std::vector<std::uint8_t> hit;
  bool stamp_used = false;

  for (std::int64_t j = 1; j <= j_cap;) {
    const int oct = floor_log2(j);
    if (!scan.scale_possible(depth - oct, lambda)) {
      j = std::int64_t(1) << (oct + 1);
      continue;
    }

    std::fill(open.begin(), open.end(), 0u);
    std::int64_t unresolved = 0;
    for (std::int64_t c = 0; c < cells; ++c) {
      if (value[std::size_t(c)] == kInf) {
        ++unresolved;
        open[std::size_t(point_of(c) + seed_shift)] += 1u;
      }
    }
    if (unresolved == 0) break;
    axis_prefix(open, pstride, dim, b + 1);

    const std::int64_t width = b + j - 1;  // anchors per axis, a in [1-j, b-1]
    std::int64_t total = 1;
    for (int i = 0; i < dim; ++i) total *= width;
    hit.assign(std::size_t(total), 0u);

    const auto probe = [&](std::int64_t t) {
      Corner a{};
      std::int64_t rem = t;
      for (int i = 0; i < dim; ++i) {
        a[i] = rem % width + (1 - j);
        rem /= width;
      }
      Corner clo{}, chi{};
      for (int i = 0; i < dim; ++i) {
        clo[i] = std::max<std::int64_t>(a[i], 0);
        chi[i] = std::min<std::int64_t>(a[i] + j, b);
      }
      if (box_sum(open, pstride, dim, clo, chi) == 0) return;
      if (scan.thick(a, j, lambda)) hit[std::size_t(t)] = 1u;
    };
    if (parallel) {
#ifdef DHC_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 64)
#endif
      for (std::int64_t t = 0; t < total; ++t) probe(t);
    } else {
      for (std::int64_t t = 0; t < total; ++t) probe(t);
    }

    std::int64_t hits = 0;
    for (std::int64_t t = 0; t < total; ++t) {
      if (!hit[std::size_t(t)]) continue;
      if (hits == 0 && stamp_used) std::fill(stamp.begin(), stamp.end(), 0);
      ++hits;
      Corner a{}, clo{}, chi{};
      std::int64_t rem = t;
      for (int i = 0; i < dim; ++i) {
        a[i] = rem % width + (1 - j);
        rem /= width;
        clo[i] = std::max<std::int64_t>(a[i], 0);
        chi[i] = std::min<std::int64_t>(a[i] + j, b);
      }
      for (unsigned mask = 0; mask < (1u << dim); ++mask) {
        std::int64_t idx = 0;
        int bits = 0;
        for (int i = 0; i < dim; ++i) {
          const bool high = (mask >> unsigned(i)) & 1u;
          bits += int(high);
          idx += (high ? chi[i] : clo[i]) * pstride[i];
        }
        stamp[std::size_t(idx)] += (bits & 1) ? -1 : 1;
      }
    }
    if (hits > 0) {
      stamp_used = true;
      axis_prefix(stamp, pstride, dim, b + 1);
      const double paint = double(j) * h;
      for (std::int64_t c = 0; c < cells; ++c) {
        if (value[std::size_t(c)] == kInf && stamp[std::size_t(point_of(c))] > 0)
          value[std::size_t(c)] = paint;
      }
    }
    ++j;
  }
}

ThickDistanceField field_impl(const GridSet& s, double d, double lambda, bool parallel) {
  require(lambda > 0.0 && lambda <= 1.0, "distance field: lambda must lie in (0, 1]");
  const ThickScan scan(s, d);
  ThickDistanceField f;
  f.d = d;
  f.lambda = lambda;
  f.dim = s.dim();
  f.depth = s.depth();
  const std::int64_t b = std::int64_t(1) << f.depth;
  std::int64_t cells = 1;
  for (int i = 0; i < f.dim; ++i) cells *= b;
  f.value.assign(std::size_t(cells), kInf);
  s.visit_cells([&](const Corner& c) { f.value[f.index(c)] = 0.0; });
  min_side_sweep(scan, lambda, b, f.value, parallel);
  return f;
}

}  // namespace

std::size_t ThickDistanceField::index(const Corner& cell) const {
  const std::int64_t b = std::int64_t(1) << depth;
  std::size_t idx = 0;
  for (int i = dim - 1; i >= 0; --i) {
    require(cell[i] >= 0 && cell[i] < b, "distance field: cell outside the grid");
    idx = idx * std::size_t(b) + std::size_t(cell[i]);
  }
  return idx;
}

ThickDistanceField thick_distance_field(const GridSet& s, double d, double lambda) {
  return field_impl(s, d, lambda, true);
}

ThickDistanceField thick_distance_field_serial(const GridSet& s, double d, double lambda) {
  return field_impl(s, d, lambda, false);
}

ThickDistance thick_distance_info(const GridSet& s, double d, double lambda, const Point& x) {
  require(lambda > 0.0 && lambda <= 1.0, "thick distance: lambda must lie in (0, 1]");
  require(!s.empty(), "thick distance: set has no occupied cells");
  for (int i = 0; i < s.dim(); ++i)
    require(x[i] >= 0.0 && x[i] <= 1.0, "thick distance: point outside the unit box");
  const ThickScan scan(s, d);
  const double h = pow2(-s.depth());

  ThickDistance out;
  const std::int64_t v = scan.min_thick_side_cells(x, lambda);
  out.value = v < 0 ? kInf : double(v) * h;
  out.bracket_hi = out.value;
  if (v != 0) {
    // A thick cube of side l placed anywhere snaps outward to an anchored
    // cube of side at most 2l that is thick at lambda / 2^d, so half the
    // relaxed anchored minimum sits below the continuum infimum.
    const double relaxed = lambda / std::exp2(d);
    const std::int64_t v2 = scan.min_thick_side_cells(x, relaxed);
    out.bracket_lo = v2 <= 0 ? 0.0 : 0.5 * double(v2) * h;
  }
  double factor = kInf;
  if (d > 0.0) factor = std::pow(scan.table().root_cost() / lambda, 1.0 / d);
  for (int i = 0; i < s.dim(); ++i)
    out.hypothesis_met = out.hypothesis_met && std::fabs(x[i] - 0.5) <= 0.5 * factor;
  return out;
}

double thick_distance(const GridSet& s, double d, double lambda, const Point& x) {
  return thick_distance_info(s, d, lambda, x).value;
}

GridRegion thick_neighborhood(const GridSet& s, double d, double lambda, double delta) {
  require(lambda > 0.0 && lambda <= 1.0, "thick neighborhood: lambda must lie in (0, 1]");
  require(delta >= 0.0 && !std::isnan(delta), "thick neighborhood: delta must be non-negative");
  if (delta == 0.0) return s;
  const ThickScan scan(s, d);
  const int dim = s.dim();
  const int depth = s.depth();
  const std::int64_t b = std::int64_t(1) << depth;
  const double h = pow2(-depth);

  // Largest side strictly below delta, in cells.
  std::int64_t j_cap = b;
  const double scaled = delta / h;
  if (scaled <= double(b)) j_cap = std::int64_t(std::ceil(scaled)) - 1;
  if (j_cap < 1) return s;
  j_cap = std::min(j_cap, b);

  std::int64_t cells = 1;
  for (int i = 0; i < dim; ++i) cells *= b;
  std::vector<double> value(std::size_t(cells), kInf);
  s.visit_cells([&](const Corner& c) {
    std::size_t idx = 0;
    for (int i = dim - 1; i >= 0; --i) idx = idx * std::size_t(b) + std::size_t(c[i]);
    value[idx] = 0.0;
  });
  min_side_sweep(scan, lambda, j_cap, value, true);

  std::vector<Corner> covered;
  for (std::int64_t f = 0; f < cells; ++f) {
    if (value[std::size_t(f)] >= delta) continue;
    Corner c{};
    std::int64_t rem = f;
    for (int i = 0; i < dim; ++i) {
      c[i] = rem % b;
      rem /= b;
    }
    covered.push_back(c);
  }
  return GridSet::from_cells(dim, depth, std::move(covered));
}

PseudometricTable::PseudometricTable(const GridSet& s, double d, double lambda, bool parallel)
    : set_(&s), d_(d), lambda_(lambda), dim_(s.dim()), depth_(s.depth()) {
  require(lambda > 0.0 && lambda <= 1.0, "pseudometric: lambda must lie in (0, 1]");
  require(!s.empty(), "pseudometric: set has no occupied cells");
  const std::int64_t b = std::int64_t(1) << depth_;
  n_ = 1;
  for (int i = 0; i < dim_; ++i) n_ *= b;
  if (n_ > pseudometric_cell_cap())
    throw resource_error("pseudometric: grid has more cells than the table budget");
  const ThickScan scan(s, d);
  w_.assign(std::size_t(n_) * std::size_t(n_), kInf);
  const double h = pow2(-depth_);

  const auto fill_row = [&](std::int64_t u) {
    double* row = &w_[std::size_t(u) * std::size_t(n_)];
    const Corner cu = cell_of(std::size_t(u));
    std::int64_t open = n_;
    for (std::int64_t j = 1; j <= b && open > 0;) {
      const int oct = floor_log2(j);
      if (!scan.scale_possible(depth_ - oct, lambda)) {
        j = std::int64_t(1) << (oct + 1);
        continue;
      }
      Corner alo{}, ahi{};
      for (int i = 0; i < dim_; ++i) {
        alo[i] = cu[i] + 1 - j;  // cube must hold the center of cu
        ahi[i] = cu[i];
      }
      const double paint = double(j) * h;
      for_each_corner(dim_, alo, ahi, [&](const Corner& a) {
        if (!scan.thick(a, j, lambda)) return false;
        Corner clo{}, chi{};
        for (int i = 0; i < dim_; ++i) {
          clo[i] = std::max<std::int64_t>(a[i], 0);
          chi[i] = std::min<std::int64_t>(a[i] + j, b) - 1;
        }
        for_each_corner(dim_, clo, chi, [&](const Corner& c) {
          double& slot = row[cell_index(c)];
          if (slot == kInf) {
            slot = paint;
            --open;
          }
          return false;
        });
        return false;
      });
      ++j;
    }
  };
  if (parallel) {
#ifdef DHC_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t u = 0; u < n_; ++u) fill_row(u);
  } else {
    for (std::int64_t u = 0; u < n_; ++u) fill_row(u);
  }
}

std::size_t PseudometricTable::cell_index(const Corner& cell) const {
  const std::int64_t b = std::int64_t(1) << depth_;
  std::size_t idx = 0;
  for (int i = dim_ - 1; i >= 0; --i) {
    require(cell[i] >= 0 && cell[i] < b, "pseudometric: cell outside the grid");
    idx = idx * std::size_t(b) + std::size_t(cell[i]);
  }
  return idx;
}

Corner PseudometricTable::cell_of(std::size_t idx) const {
  require(idx < std::size_t(n_), "pseudometric: node out of range");
  const std::size_t b = std::size_t(1) << depth_;
  Corner c{};
  for (int i = 0; i < dim_; ++i) {
    c[i] = std::int64_t(idx % b);
    idx /= b;
  }
  return c;
}

Point PseudometricTable::center_of(std::size_t idx) const {
  const Corner c = cell_of(idx);
  const double h = pow2(-depth_);
  Point p{};
  for (int i = 0; i < dim_; ++i) p[i] = (double(c[i]) + 0.5) * h;
  return p;
}

std::vector<double> PseudometricTable::chain_values(std::size_t u, int max_hops,
                                                    std::vector<std::size_t>* pred) const {
  require(u < std::size_t(n_), "pseudometric: node out of range");
  require(max_hops >= 1, "pseudometric: hop cap must be at least one");
  const std::size_t n = std::size_t(n_);
  std::vector<double> dist(n), next(n);
  for (std::size_t v = 0; v < n; ++v) dist[v] = w_[u * n + v];
  dist[u] = 0.0;
  for (int hop = 2; hop <= max_hops; ++hop) {
    bool changed = false;
    for (std::size_t v = 0; v < n; ++v) {
      double best = dist[v];
      for (std::size_t z = 0; z < n; ++z) {
        const double dz = dist[z];
        if (dz == kInf) continue;
        const double cand = dz + w_[z * n + v];
        if (cand < best) best = cand;
      }
      if (best != dist[v]) changed = true;
      next[v] = best;
    }
    dist.swap(next);
    if (!changed) break;
  }
  if (pred) {
    pred->assign(n, std::size_t(-1));
    (*pred)[u] = u;
    for (std::size_t v = 0; v < n; ++v) {
      if (v == u || dist[v] == kInf) continue;
      for (std::size_t z = 0; z < n; ++z) {
        if (z == v || dist[z] == kInf) continue;
        if (dist[z] + w_[z * n + v] == dist[v]) {
          (*pred)[v] = z;
          break;
        }
      }
    }
  }
  return dist;
}

PseudometricTable build_pseudometric_table(const GridSet& s, double d, double lambda) {
  return PseudometricTable(s, d, lambda, true);
}

PseudometricTable build_pseudometric_table_serial(const GridSet& s, double d, double lambda) {
  return PseudometricTable(s, d, lambda, false);
}

PseudometricEval pseudometric(const PseudometricTable& t, const Point& x, const Point& y,
                              int chain_cap) {
  require(chain_cap >= 1, "pseudometric: chain cap must be at least one");
  const int dim = t.dim();
  const std::int64_t b = std::int64_t(1) << t.depth();
  const double h = pow2(-t.depth());
  for (int i = 0; i < dim; ++i)
    require(x[i] >= 0.0 && x[i] <= 1.0 && y[i] >= 0.0 && y[i] <= 1.0,
            "pseudometric: points must lie in the unit box");
  Corner cx{}, cy{};
  for (int i = 0; i < dim; ++i) {
    cx[i] = std::clamp<std::int64_t>(std::int64_t(std::floor(x[i] / h)), 0, b - 1);
    cy[i] = std::clamp<std::int64_t>(std::int64_t(std::floor(y[i] / h)), 0, b - 1);
  }
  PseudometricEval out;
  const std::size_t u = t.cell_index(cx);
  const std::size_t v = t.cell_index(cy);
  out.x = t.center_of(u);
  out.y = t.center_of(v);
  out.chain = {out.x, out.y};
  if (u == v) return out;

  if (t.set().cell_occupied(cx) || t.set().cell_occupied(cy)) {
    std::vector<std::size_t> pred;
    const std::vector<double> dist = t.chain_values(u, chain_cap, &pred);
    out.value = dist[v];
    if (out.value == kInf) return out;
    std::vector<std::size_t> path{v};
    while (path.back() != u) {
      const std::size_t p = pred[path.back()];
      if (p == std::size_t(-1)) {
        path.clear();
        break;
      }
      path.push_back(p);
    }
    // A truncated hop cap can leave values without a tight predecessor
    // chain; the evaluation then keeps the bare endpoints.
    if (path.empty()) return out;
    std::reverse(path.begin(), path.end());
    out.chain.clear();
    for (const std::size_t p : path) out.chain.push_back(t.center_of(p));
    const ThickScan scan(t.set(), t.d());
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      Corner a{};
      const std::int64_t jc = scan.min_thick_side_cells(t.center_of(path[i]),
                                                        t.center_of(path[i + 1]),
                                                        t.lambda(), &a);
      expect(jc >= 1 && double(jc) * h == t.link(path[i], path[i + 1]),
             "pseudometric: witness cube does not reproduce its link");
      GeomCube g{dim, {}, 0.5 * double(jc) * h};
      for (int k = 0; k < dim; ++k) g.center[k] = (double(a[k]) + 0.5 * double(jc)) * h;
      out.cubes.push_back(g);
    }
    return out;
  }

  // Both endpoints off the set: compare single-source chain values over the
  // occupied centers.
  const std::vector<double> du = t.chain_values(u, chain_cap);
  const std::vector<double> dv = t.chain_values(v, chain_cap);
  std::vector<std::size_t> occ;
  t.set().visit_cells([&](const Corner& c) { occ.push_back(t.cell_index(c)); });
  std::sort(occ.begin(), occ.end());
  double norm = 0.0;
  for (int i = 0; i < dim; ++i) norm = std::max(norm, std::fabs(out.x[i] - out.y[i]));
  double sup = -1.0;
  std::size_t sup_at = occ.front();
  bool unreachable = false;
  for (const std::size_t z : occ) {
    if (du[z] == kInf || dv[z] == kInf) {
      unreachable = true;
      sup_at = z;
      break;
    }
    const double diff = std::fabs(du[z] - dv[z]);
    if (diff > sup) {
      sup = diff;
      sup_at = z;
    }
  }
  if (unreachable) {
    out.value = kInf;
    out.via_sup = true;
    out.sup_point = t.center_of(sup_at);
    return out;
  }
  out.value = std::max(norm, sup);
  out.via_sup = sup > norm;
  if (out.via_sup) out.sup_point = t.center_of(sup_at);
  return out;
}

PseudometricEval pseudometric(const GridSet& s, double d, double lambda, const Point& x,
                              const Point& y, int chain_cap) {
  const PseudometricTable t(s, d, lambda, true);
  return pseudometric(t, x, y, chain_cap);
}

VolumeEstimate neighborhood_volume(const GridRegion& region, double eps) {
  require(eps >= 0.0 && !std::isnan(eps), "neighborhood volume: eps must be non-negative");
  const int dim = region.dim();
  const int depth = region.depth();
  const std::int64_t b = std::int64_t(1) << depth;
  std::int64_t cells = 1;
  for (int i = 0; i < dim; ++i) cells *= b;
  if (cells > (std::int64_t(1) << 22))
    throw resource_error("neighborhood volume: grid has more cells than the transform budget");
  if (eps == 0.0) return {region.measure(), 0.0};
  if (region.empty()) return {0.0, 0.0};

  // Chebyshev cell-distance transform by breadth-first rings.
  std::vector<std::int32_t> ring(std::size_t(cells), -1);
  std::vector<std::int64_t> cur, nxt;
  const auto flat = [&](const Corner& c) {
    std::int64_t idx = 0;
    for (int i = dim - 1; i >= 0; --i) idx = idx * b + c[i];
    return idx;
  };
  region.visit_cells([&](const Corner& c) {
    const std::int64_t f = flat(c);
    ring[std::size_t(f)] = 0;
    cur.push_back(f);
  });
  std::int32_t level = 0;
  while (!cur.empty()) {
    ++level;
    nxt.clear();
    for (const std::int64_t f : cur) {
      Corner c{};
      std::int64_t rem = f;
      for (int i = 0; i < dim; ++i) {
        c[i] = rem % b;
        rem /= b;
      }
      Corner lo{}, hi{};
      for (int i = 0; i < dim; ++i) {
        lo[i] = std::max<std::int64_t>(c[i] - 1, 0);
        hi[i] = std::min<std::int64_t>(c[i] + 1, b - 1);
      }
      for_each_corner(dim, lo, hi, [&](const Corner& nb) {
        const std::int64_t g = flat(nb);
        if (ring[std::size_t(g)] < 0) {
          ring[std::size_t(g)] = level;
          nxt.push_back(g);
        }
        return false;
      });
    }
    cur.swap(nxt);
  }

  // A cell at ring k is fully inside the open neighborhood when k*h <= eps
  // and misses it entirely when (k-1)*h >= eps.
  const double h = pow2(-depth);
  std::int64_t outer = 0, inner = 0;
  for (std::int64_t f = 0; f < cells; ++f) {
    const std::int32_t k = ring[std::size_t(f)];
    if (double(k - 1) * h < eps) ++outer;
    if (double(k) * h <= eps) ++inner;
  }
  const double cell_measure = side_pow(depth, dim);
  return {double(outer) * cell_measure, double(outer - inner) * cell_measure};
}

VolumeEstimate neighborhood_volume(int depth, const CubeFamily& f, double eps) {
  GridRegion r = GridSet::from_cells(f.dim, depth, {});
  for (const CubeIndex& m : f.members) {
    require(m.depth <= depth, "neighborhood volume: member deeper than the grid");
    r = set_union(r, cube_region(f.dim, depth, m));
  }
  return neighborhood_volume(r, eps);
}

StripVolume boundary_strip_volume(const GeomCube& q, const CubeFamily& f) {
  require(q.dim == f.dim, "boundary strip: dimension mismatch");
  require(q.half_side > 0.0, "boundary strip: cube must have positive side");
  if (f.empty()) return {0.0, 0.0, true};
  require(is_non_overlapping(f), "boundary strip: members overlap");
  const auto [floor_side, roof] = metric_floor_roof(f);
  (void)floor_side;
  require(roof < 0.5 * q.side(), "boundary strip: member sides must stay below half the cube");

  double total = 0.0;
  for (const CubeIndex& m : f.members) {
    const GeomCube g = to_geom(m);
    if (!g.meets(q)) continue;
    bool interior = true;
    for (int i = 0; i < q.dim && interior; ++i)
      interior = q.lo(i) < g.lo(i) && g.hi(i) < q.hi(i);
    if (interior) continue;
    total += side_pow(m.depth, double(f.dim));
  }
  StripVolume out;
  out.value = total;
  out.bound = std::exp2(2.0 * double(q.dim)) * std::pow(q.side(), double(q.dim) - 1.0) * roof;
  out.ok = geq_rel(out.bound, out.value);
  return out;
}

StripVolume boundary_strip_volume(const CubeIndex& q, const CubeFamily& f) {
  return boundary_strip_volume(to_geom(q), f);
}

NeighborhoodVolumeAudit neighborhood_volume_audit(int depth, const CubeFamily& f, double d,
                                                  double tau, double delta, double r,
                                                  double cbar) {
  require(!f.empty(), "volume audit: family is empty");
  const int n = f.dim;
  require(d > 0.0 && d < double(n),
          "volume audit: exponent must lie strictly between 0 and the dimension");
  require(cbar > 1.0, "volume audit: cbar must exceed one");
  require(r > 1.0, "volume audit: r must exceed one");
  require(tau > 0.0 && delta > 0.0, "volume audit: scales must be positive");

  NeighborhoodVolumeAudit out;
  const double theta_top = std::pow(cbar, 1.0 / double(n));
  const double halo = std::pow(std::floor(2.0 * r) + 1.0, double(n));
  const double spread = 2.0 * std::floor(r) + 1.0;
  for (int i = 1; i < 64; ++i) {
    const double theta = 1.0 + (theta_top - 1.0) * double(i) / 64.0;
    const double head = std::pow(theta, double(n));
    if (head >= cbar) continue;
    int k = 0;
    bool found = false;
    for (; k <= 4096; ++k) {
      if (head + halo * std::exp2(-double(k) * (double(n) - d)) < cbar) {
        found = true;
        break;
      }
    }
    if (!found) continue;
    out.delta_bar = std::max(out.delta_bar, (theta - 1.0) * std::exp2(-double(k)) / spread);
  }

  const auto [floor_side, roof] = metric_floor_roof(f);
  out.hypothesis_ok = geq_rel(floor_side, delta * tau) && geq_rel(tau, roof) &&
                      geq_rel(out.delta_bar, delta);
  out.volume = neighborhood_volume(depth, f, r * delta * tau).value;
  out.bound = cbar * std::pow(tau, double(n) - d) * family_content_sum(f, d);
  out.ok = geq_rel(out.bound, out.volume);
  return out;
}

}  // namespace dhc
