#include "dhc/porosity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dhc/content.hpp"
#include "dhc/thick_metric.hpp"
#include "dhc/util.hpp"

namespace dhc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int64_t kScanBudget = std::int64_t(1) << 22;

void require_query_cube(const GridSet& s, const CubeIndex& q, const char* who) {
  require(q.dim == s.dim(), std::string(who) + ": dimension mismatch");
  require(q.depth >= 0 && q.depth <= s.depth(),
          std::string(who) + ": query depth outside the grid");
  for (int i = 0; i < q.dim; ++i)
    require(q.corner[i] >= 0 && q.corner[i] < (std::int64_t(1) << q.depth),
            std::string(who) + ": query cube outside the unit box");
}

// Dense occupancy over the leaf cells, axis-0 minor.
std::vector<unsigned char> occupancy(const GridSet& s) {
  const std::int64_t b = s.cells_per_axis();
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

// Largest empty anchored cube with a given low corner. 0 on occupied cells,
// else 1 + min over the 2^dim - 1 forward diagonal neighbors (out-of-grid
// neighbors count 0): the side-(j+1) cube at c is the cell c plus the side-j
// cubes at every forward offset, so the recurrence is exact in any dimension.
struct HoleDp {
  int dim = 1;
  int depth = 0;
  std::int64_t b = 1;
  std::vector<std::int32_t> best;
};

HoleDp build_hole_dp(const GridSet& s, const std::vector<unsigned char>& occ) {
  HoleDp dp;
  dp.dim = s.dim();
  dp.depth = s.depth();
  dp.b = s.cells_per_axis();
  dp.best.assign(occ.size(), 0);
  std::int64_t stride[kMaxDim];
  stride[0] = 1;
  for (int i = 1; i < dp.dim; ++i) stride[i] = stride[i - 1] * dp.b;
  Corner c{};
  for (int i = 0; i < dp.dim; ++i) c[i] = dp.b - 1;
  for (std::int64_t f = std::int64_t(occ.size()) - 1; f >= 0; --f) {
    if (!occ[std::size_t(f)]) {
      std::int32_t m = std::numeric_limits<std::int32_t>::max();
      for (unsigned e = 1; e < (1u << dp.dim) && m > 0; ++e) {
        std::int64_t g = f;
        bool inside = true;
        for (int i = 0; i < dp.dim && inside; ++i) {
          if (!((e >> i) & 1)) continue;
          if (c[i] + 1 == dp.b)
            inside = false;
          else
            g += stride[i];
        }
        m = std::min(m, inside ? dp.best[std::size_t(g)] : 0);
      }
      dp.best[std::size_t(f)] = 1 + m;
    }
    int axis = 0;
    while (axis < dp.dim && --c[axis] < 0) {
      c[axis] = dp.b - 1;
      ++axis;
    }
  }
  return dp;
}

struct HoleBest {
  std::int64_t j = 0;
  Corner corner{};
};

HoleBest best_hole_in(const HoleDp& dp, const CellBox& box) {
  HoleBest out;
  if (box.empty()) return out;
  std::int64_t stride[kMaxDim];
  stride[0] = 1;
  for (int i = 1; i < dp.dim; ++i) stride[i] = stride[i - 1] * dp.b;
  Corner c = box.lo;
  while (true) {
    std::int64_t f = 0;
    for (int i = 0; i < dp.dim; ++i) f += c[i] * stride[i];
    std::int64_t j = dp.best[std::size_t(f)];
    for (int i = 0; i < dp.dim; ++i) j = std::min(j, box.hi[i] - c[i]);
    if (j > out.j) {
      out = {j, c};
    } else if (j == out.j && j > 0) {
      for (int i = 0; i < dp.dim; ++i) {
        if (c[i] != out.corner[i]) {
          if (c[i] < out.corner[i]) out.corner = c;
          break;
        }
      }
    }
    int axis = 0;
    while (axis < dp.dim && ++c[axis] == box.hi[axis]) {
      c[axis] = box.lo[axis];
      ++axis;
    }
    if (axis == dp.dim) break;
  }
  return out;
}

struct DilationScan {
  const ContentTable* table = nullptr;
  ThicknessQuery tq;
  GeomCube qgeom;
  int kmin = 0;
  int grid_depth = 0;
  double r = 1.0;
  CellBox qbox;
  std::int64_t width[kMaxDim] = {};
  std::vector<unsigned char>* cut = nullptr;
};

void mark_dilation(DilationScan& ds, const GeomCube& g) {
  double lo[kMaxDim], hi[kMaxDim];
  for (int i = 0; i < g.dim; ++i) {
    lo[i] = g.lo(i);
    hi[i] = g.hi(i);
  }
  CellBox bx = intersect(outer_cell_box(g.dim, ds.grid_depth, lo, hi), ds.qbox);
  if (bx.empty()) return;
  Corner c = bx.lo;
  while (true) {
    std::int64_t f = 0, stride = 1;
    for (int i = 0; i < g.dim; ++i) {
      f += (c[i] - ds.qbox.lo[i]) * stride;
      stride *= ds.width[i];
    }
    (*ds.cut)[std::size_t(f)] = 1;
    int axis = 0;
    while (axis < g.dim && ++c[axis] == bx.hi[axis]) {
      c[axis] = bx.lo[axis];
      ++axis;
    }
    if (axis == g.dim) break;
  }
}

// Depth-first over the dyadic cubes of positive content. A branch ends at
// its shallowest admissible thick cube: for r >= 1 every descendant's
// dilation sits inside it, so deeper hits would mark nothing new.
void scan_thick(DilationScan& ds, const CubeIndex& cube) {
  if (dyadic_content(*ds.table, cube) <= 0.0) return;
  GeomCube g = dilate(cube, ds.r);
  if (!g.meets(ds.qgeom)) return;
  if (cube.depth >= ds.kmin && is_thick(*ds.table, cube, ds.tq)) {
    mark_dilation(ds, g);
    return;
  }
  if (cube.depth == ds.grid_depth) return;
  for (unsigned o = 0; o < (1u << cube.dim); ++o) scan_thick(ds, cube.child(o));
}

}  // namespace

PorosityCertificate porosity_certificate(const GridSet& s, const CubeIndex& q) {
  require_query_cube(s, q, "porosity");
  if (std::int64_t(s.dim()) * s.depth() > 22)
    throw resource_error("porosity: grid larger than the scan budget");
  HoleDp dp = build_hole_dp(s, occupancy(s));
  HoleBest hit = best_hole_in(dp, cube_cell_box(s.depth(), q));
  PorosityCertificate out;
  out.query = q;
  out.hole.dim = q.dim;
  out.has_hole = hit.j > 0;
  out.tau = std::ldexp(double(hit.j), q.depth - s.depth());
  if (out.has_hole) {
    const double h = pow2(-s.depth());
    out.hole.half_side = 0.5 * double(hit.j) * h;
    for (int i = 0; i < q.dim; ++i)
      out.hole.center[i] = (double(hit.corner[i]) + 0.5 * double(hit.j)) * h;
  } else {
    out.hole.half_side = 0.0;
    out.hole.center = q.center();
  }
  return out;
}

CavityReport cavity_W(const GridSet& s, double d, double lambda, const CubeIndex& qbar,
                      double delta) {
  require_query_cube(s, qbar, "cavity");
  require(delta >= 0.0, "cavity: delta must be >= 0");
  CavityReport out;
  out.query = qbar;
  out.d = d;
  out.lambda = lambda;
  out.delta = delta;
  GridRegion nb = thick_neighborhood(s, d, lambda, delta * qbar.side());
  out.region = set_difference(cube_region(s.dim(), s.depth(), qbar), nb);
  out.gamma = std::ldexp(double(out.region.cell_count()), s.dim() * (qbar.depth - s.depth()));
  return out;
}

ThinSubcube thin_subcube(const GridSet& s, double d, double lambda_bar, double c,
                         const CubeIndex& qbar) {
  require_query_cube(s, qbar, "thin subcube");
  require(lambda_bar > 0.0 && lambda_bar < 1.0, "thin subcube: lambda_bar must lie in (0,1)");
  require(c > 1.0, "thin subcube: c must exceed 1");
  ContentTable t = build_content_table(s, d);
  require(!geq_rel(dyadic_content(t, qbar), lambda_bar * side_pow(qbar.depth, d)),
          "thin subcube: query cube is not thin at lambda_bar");
  std::int64_t budget = kScanBudget;
  for (int k = qbar.depth; k <= s.depth(); ++k) {
    const int m = k - qbar.depth;
    if (std::int64_t(m) * s.dim() > 22 || (budget -= std::int64_t(1) << (m * s.dim())) < 0)
      throw resource_error("thin subcube: scan budget exceeded");
    const double thr = (lambda_bar / c) * side_pow(k, d);
    const std::int64_t span = std::int64_t(1) << m;
    Corner off{};
    while (true) {
      CubeIndex cube{s.dim(), k, {}};
      for (int i = 0; i < s.dim(); ++i) cube.corner[i] = (qbar.corner[i] << m) + off[i];
      if (!geq_rel(dyadic_content(t, cube), thr)) return {cube, pow2(qbar.depth - k), true};
      int axis = s.dim() - 1;
      while (axis >= 0 && ++off[axis] == span) off[axis--] = 0;
      if (axis < 0) break;
    }
  }
  return {qbar, 0.0, false};
}

CavityReport thin_complement(const GridSet& s, double d, double lambda, double r,
                             const CubeIndex& qbar, double kappa_cap) {
  require_query_cube(s, qbar, "thin complement");
  require(lambda > 0.0 && lambda <= 1.0, "thin complement: lambda must lie in (0,1]");
  require(r >= 1.0, "thin complement: r must be >= 1");
  require(kappa_cap > 0.0, "thin complement: kappa_cap must be positive");
  ContentTable t = build_content_table(s, d);
  require(!geq_rel(dyadic_content(t, qbar), side_pow(qbar.depth, d)),
          "thin complement: query cube fails the content hypothesis");
  CellBox qbox = cube_cell_box(s.depth(), qbar);
  if (qbox.volume_cells() > kScanBudget)
    throw resource_error("thin complement: query larger than the cell budget");

  std::vector<unsigned char> cut(std::size_t(qbox.volume_cells()), 0);
  std::int64_t width[kMaxDim] = {};
  for (int i = 0; i < s.dim(); ++i) width[i] = qbox.hi[i] - qbox.lo[i];
  s.visit_cells([&](const Corner& c) {
    std::int64_t f = 0, stride = 1;
    for (int i = 0; i < s.dim(); ++i) {
      if (c[i] < qbox.lo[i] || c[i] >= qbox.hi[i]) return;
      f += (c[i] - qbox.lo[i]) * stride;
      stride *= width[i];
    }
    cut[std::size_t(f)] = 1;
  });

  const double cap = kappa_cap * qbar.side();
  int kmin = 0;
  while (kmin <= s.depth() && pow2(-kmin) > cap) ++kmin;
  if (kmin <= s.depth()) {
    DilationScan ds;
    ds.table = &t;
    ds.tq = ThicknessQuery{d, lambda};
    ds.qgeom = to_geom(qbar);
    ds.kmin = kmin;
    ds.grid_depth = s.depth();
    ds.r = r;
    ds.qbox = qbox;
    for (int i = 0; i < s.dim(); ++i) ds.width[i] = width[i];
    ds.cut = &cut;
    scan_thick(ds, CubeIndex{s.dim(), 0, {}});
  }

  std::vector<Corner> keep;
  Corner c = qbox.lo;
  while (true) {
    std::int64_t f = 0, stride = 1;
    for (int i = 0; i < s.dim(); ++i) {
      f += (c[i] - qbox.lo[i]) * stride;
      stride *= width[i];
    }
    if (!cut[std::size_t(f)]) keep.push_back(c);
    int axis = 0;
    while (axis < s.dim() && ++c[axis] == qbox.hi[axis]) {
      c[axis] = qbox.lo[axis];
      ++axis;
    }
    if (axis == s.dim()) break;
  }

  CavityReport out;
  out.query = qbar;
  out.d = d;
  out.lambda = lambda;
  out.r = r;
  out.kappa_cap = kappa_cap;
  out.region = GridSet::from_cells(s.dim(), s.depth(), std::move(keep));
  out.gamma = std::ldexp(double(out.region.cell_count()), s.dim() * (qbar.depth - s.depth()));
  return out;
}

HollowBound hollow_bound_check(const GridSet& s, double d, double lambda_bar,
                               const CubeIndex& qbar) {
  require_query_cube(s, qbar, "hollow bound");
  require(lambda_bar > 0.0 && lambda_bar < 1.0, "hollow bound: lambda_bar must lie in (0,1)");
  ContentTable t = build_content_table(s, d);
  require(!geq_rel(dyadic_content(t, qbar), lambda_bar * side_pow(qbar.depth, d)),
          "hollow bound: query cube is not thin at lambda_bar");
  HollowBound out;
  const double ratio = std::ldexp(double(s.count_in_box(cube_cell_box(s.depth(), qbar))),
                                  s.dim() * (qbar.depth - s.depth()));
  out.gamma_measured = 1.0 - ratio;
  out.gamma_bound = d > 0.0 ? 1.0 - std::pow(lambda_bar, double(s.dim()) / d) : 1.0;
  out.ok = out.gamma_measured >= out.gamma_bound - 1e-9;
  return out;
}

ConstantsTable estimate_constants(const std::vector<NamedSet>& corpus, double d,
                                  std::vector<double> lambdas, std::vector<double> lambda_bars,
                                  std::vector<double> deltas) {
  require(!corpus.empty(), "estimate: corpus is empty");
  auto tidy = [](std::vector<double>& v, const char* what) {
    require(!v.empty(), std::string("estimate: empty ") + what + " grid");
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  tidy(lambdas, "lambda");
  tidy(lambda_bars, "lambda_bar");
  tidy(deltas, "delta");
  for (double l : lambdas) require(l > 0.0 && l <= 1.0, "estimate: lambda must lie in (0,1]");
  for (double lb : lambda_bars)
    require(lb > 0.0 && lb < 1.0, "estimate: lambda_bar must lie in (0,1)");
  for (double dl : deltas) require(dl >= 0.0, "estimate: delta must be >= 0");

  const std::size_t nl = lambdas.size(), nb = lambda_bars.size(), nd = deltas.size();

  struct SetData {
    ContentTable table;
    std::vector<unsigned char> occ;
    HoleDp dp;
    std::vector<ThickDistanceField> fields;
  };
  std::vector<SetData> sets(corpus.size());
  for (std::size_t si = 0; si < corpus.size(); ++si) {
    const GridSet& s = corpus[si].set;
    sets[si].fields.reserve(nl);
    for (double lambda : lambdas) sets[si].fields.push_back(thick_distance_field(s, d, lambda));
    sets[si].table = build_content_table(s, d);
    sets[si].occ = occupancy(s);
    sets[si].dp = build_hole_dp(s, sets[si].occ);
  }

  struct Slot {
    double tau = kInf;
    std::vector<double> gamma;  // nl * nd minima
    std::int64_t thin = 0;
  };
  std::vector<Slot> slots(corpus.size() * nb);
  for (auto& sl : slots) sl.gamma.assign(nl * nd, kInf);

  const std::int64_t jobs = std::int64_t(corpus.size()) * std::int64_t(nb);
#ifdef DHC_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::int64_t job = 0; job < jobs; ++job) {
    const std::size_t si = std::size_t(job) / nb;
    const std::size_t bi = std::size_t(job) % nb;
    const GridSet& s = corpus[si].set;
    const SetData& sd = sets[si];
    Slot& slot = slots[std::size_t(job)];
    const int K = s.depth();
    const std::int64_t b = s.cells_per_axis();
    std::int64_t stride[kMaxDim];
    stride[0] = 1;
    for (int i = 1; i < s.dim(); ++i) stride[i] = stride[i - 1] * b;
    const double lambda_bar = lambda_bars[bi];
    std::vector<double> dls(nd);
    std::vector<std::int64_t> acc(nd + 1);
    for (int k = 0; k <= K; ++k) {
      const double thr = lambda_bar * side_pow(k, d);
      const double side = pow2(-k);
      for (std::size_t di = 0; di < nd; ++di) dls[di] = deltas[di] * side;
      const std::int64_t span = std::int64_t(1) << k;
      Corner corner{};
      while (true) {
        CubeIndex cube{s.dim(), k, corner};
        if (!geq_rel(dyadic_content(sd.table, cube), thr)) {
          ++slot.thin;
          CellBox box = cube_cell_box(K, cube);
          slot.tau = std::min(slot.tau, std::ldexp(double(best_hole_in(sd.dp, box).j), k - K));
          for (std::size_t li = 0; li < nl; ++li) {
            const auto& field = sd.fields[li].value;
            std::fill(acc.begin(), acc.end(), 0);
            Corner c = box.lo;
            while (true) {
              std::int64_t f = 0;
              for (int i = 0; i < s.dim(); ++i) f += c[i] * stride[i];
              if (!sd.occ[std::size_t(f)]) {
                // a cell survives the delta-removal iff its smallest thick
                // side reaches delta * side(cube)
                const double v = field[std::size_t(f)];
                ++acc[std::size_t(std::upper_bound(dls.begin(), dls.end(), v) - dls.begin())];
              }
              int axis = 0;
              while (axis < s.dim() && ++c[axis] == box.hi[axis]) {
                c[axis] = box.lo[axis];
                ++axis;
              }
              if (axis == s.dim()) break;
            }
            std::int64_t cnt = 0;
            for (std::size_t di = nd; di-- > 0;) {
              cnt += acc[di + 1];
              double& cell = slot.gamma[li * nd + di];
              cell = std::min(cell, std::ldexp(double(cnt), s.dim() * (k - K)));
            }
          }
        }
        int axis = 0;
        while (axis < s.dim() && ++corner[axis] == span) {
          corner[axis] = 0;
          ++axis;
        }
        if (axis == s.dim()) break;
      }
    }
  }

  ConstantsTable out;
  out.d = d;
  out.rows.reserve(nl * nb * nd);
  for (std::size_t li = 0; li < nl; ++li)
    for (std::size_t bi = 0; bi < nb; ++bi)
      for (std::size_t di = 0; di < nd; ++di) {
        ConstantsRow row;
        row.lambda = lambdas[li];
        row.lambda_bar = lambda_bars[bi];
        row.delta = deltas[di];
        row.gamma_floor = kInf;
        row.tau_floor = kInf;
        row.thin_cubes = 0;
        for (std::size_t si = 0; si < corpus.size(); ++si) {
          const Slot& slot = slots[si * nb + bi];
          row.thin_cubes += slot.thin;
          row.tau_floor = std::min(row.tau_floor, slot.tau);
          row.gamma_floor = std::min(row.gamma_floor, slot.gamma[li * nd + di]);
        }
        row.vacuous = row.thin_cubes == 0;
        out.rows.push_back(row);
      }

  auto row_at = [&](std::size_t li, std::size_t bi, std::size_t di) -> const ConstantsRow& {
    return out.rows[(li * nb + bi) * nd + di];
  };
  out.trend_gamma_vs_lambda_bar = true;
  for (std::size_t li = 0; li < nl; ++li)
    for (std::size_t di = 0; di < nd; ++di) {
      double last = kInf;
      for (std::size_t bi = 0; bi < nb; ++bi) {
        const ConstantsRow& row = row_at(li, bi, di);
        if (row.vacuous) continue;
        if (row.gamma_floor > last) out.trend_gamma_vs_lambda_bar = false;
        last = row.gamma_floor;
      }
    }
  std::vector<double> dbar(nl * nb, 0.0);
  std::vector<unsigned char> have(nl * nb, 0);
  for (std::size_t li = 0; li < nl; ++li)
    for (std::size_t bi = 0; bi < nb; ++bi) {
      if (row_at(li, bi, 0).vacuous) continue;
      have[li * nb + bi] = 1;
      for (std::size_t di = 0; di < nd; ++di)
        if (row_at(li, bi, di).gamma_floor > 0.0) dbar[li * nb + bi] = deltas[di];
    }
  out.trend_delta_vs_lambda_bar = true;
  for (std::size_t li = 0; li < nl; ++li) {
    double last = kInf;
    for (std::size_t bi = 0; bi < nb; ++bi) {
      if (!have[li * nb + bi]) continue;
      if (dbar[li * nb + bi] > last) out.trend_delta_vs_lambda_bar = false;
      last = dbar[li * nb + bi];
    }
  }
  out.trend_delta_vs_lambda = true;
  for (std::size_t bi = 0; bi < nb; ++bi) {
    double last = -kInf;
    for (std::size_t li = 0; li < nl; ++li) {
      if (!have[li * nb + bi]) continue;
      if (dbar[li * nb + bi] < last) out.trend_delta_vs_lambda = false;
      last = dbar[li * nb + bi];
    }
  }
  return out;
}

double empirical_delta_bar(const ConstantsTable& t, double lambda, double lambda_bar) {
  double best = 0.0;
  for (const auto& row : t.rows)
    if (row.lambda == lambda && row.lambda_bar == lambda_bar && !row.vacuous &&
        row.gamma_floor > 0.0)
      best = std::max(best, row.delta);
  return best;
}

}  // namespace dhc
