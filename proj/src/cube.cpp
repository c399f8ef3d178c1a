#include "dhc/cube.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace dhc {

Point CubeIndex::center() const {
  Point p{};
  double h = 0.5 * side();
  for (int i = 0; i < dim; ++i) p[i] = lo(i) + h;
  return p;
}

bool CubeIndex::contains(const CubeIndex& q) const {
  if (dim != q.dim || depth > q.depth) return false;
  int shift = q.depth - depth;
  for (int i = 0; i < dim; ++i)
    if ((q.corner[i] >> shift) != corner[i]) return false;
  return true;
}

bool CubeIndex::contains_point(const Point& x) const {
  for (int i = 0; i < dim; ++i)
    if (x[i] < lo(i) || x[i] > hi(i)) return false;
  return true;
}

CubeIndex CubeIndex::parent() const {
  expect(depth > 0, "parent of a depth-0 cube");
  CubeIndex p{dim, depth - 1, corner};
  for (int i = 0; i < dim; ++i) p.corner[i] >>= 1;
  return p;
}

CubeIndex CubeIndex::child(unsigned octant) const {
  expect(depth < kMaxDepth, "child beyond depth cap");
  CubeIndex c{dim, depth + 1, corner};
  for (int i = 0; i < dim; ++i)
    c.corner[i] = 2 * corner[i] + ((octant >> i) & 1u);
  return c;
}

bool cube_less(const CubeIndex& a, const CubeIndex& b) {
  if (a.depth != b.depth) return a.depth < b.depth;
  for (int i = 0; i < a.dim; ++i)
    if (a.corner[i] != b.corner[i]) return a.corner[i] < b.corner[i];
  return false;
}

std::string cube_to_string(const CubeIndex& q) {
  std::ostringstream os;
  os << "Q(" << q.depth;
  for (int i = 0; i < q.dim; ++i) os << "," << q.corner[i];
  os << ")";
  return os.str();
}

bool GeomCube::contains_point(const Point& x) const {
  for (int i = 0; i < dim; ++i)
    if (x[i] < lo(i) || x[i] > hi(i)) return false;
  return true;
}

bool GeomCube::meets(const GeomCube& o) const {
  for (int i = 0; i < dim; ++i)
    if (hi(i) < o.lo(i) || o.hi(i) < lo(i)) return false;
  return true;
}

bool GeomCube::contained_in(const GeomCube& o) const {
  for (int i = 0; i < dim; ++i)
    if (lo(i) < o.lo(i) || hi(i) > o.hi(i)) return false;
  return true;
}

GeomCube to_geom(const CubeIndex& q) {
  GeomCube g;
  g.dim = q.dim;
  g.center = q.center();
  g.half_side = 0.5 * q.side();
  return g;
}

GeomCube dilate(const CubeIndex& q, double c) {
  require(c >= 0.0, "dilate: factor must be >= 0");
  GeomCube g = to_geom(q);
  g.half_side *= c;
  return g;
}

GeomCube dilate(const GeomCube& q, double c) {
  require(c >= 0.0, "dilate: factor must be >= 0");
  GeomCube g = q;
  g.half_side *= c;
  return g;
}

CubeFamily make_family(int dim, std::vector<CubeIndex> members) {
  for (const auto& m : members)
    require(m.dim == dim, "family member dimension mismatch");
  std::sort(members.begin(), members.end(), cube_less);
  members.erase(std::unique(members.begin(), members.end()), members.end());
  return CubeFamily{dim, std::move(members)};
}

bool is_non_overlapping(const CubeFamily& f) {
  // Dyadic cubes overlap in the interior iff one contains the other, so it
  // suffices to look for ancestor/descendant pairs.
  for (std::size_t i = 0; i < f.members.size(); ++i)
    for (std::size_t j = i + 1; j < f.members.size(); ++j) {
      const auto& a = f.members[i];
      const auto& b = f.members[j];
      if (a.contains(b) || b.contains(a)) return false;
    }
  return true;
}

double family_content_sum(const CubeFamily& f, double d) {
  double s = 0.0;
  for (const auto& m : f.members) s += side_pow(m.depth, d);
  return s;
}

std::pair<double, double> metric_floor_roof(const CubeFamily& f) {
  require(!f.empty(), "metric_floor_roof: empty family");
  int kmin = f.members.front().depth, kmax = kmin;
  for (const auto& m : f.members) {
    kmin = std::min(kmin, m.depth);
    kmax = std::max(kmax, m.depth);
  }
  return {pow2(-kmax), pow2(-kmin)};
}

CubeFamily restrict_family(const CubeFamily& f, const CubeIndex& q) {
  CubeFamily r{f.dim, {}};
  for (const auto& m : f.members)
    if (q.contains(m)) r.members.push_back(m);
  return r;
}

FamilyCompare family_compare(const CubeFamily& a, const CubeFamily& b) {
  require(a.dim == b.dim, "family_compare: dimension mismatch");

  auto over = [](const CubeFamily& up, const CubeFamily& dn, bool& strict) {
    strict = true;
    for (const auto& q : dn.members) {
      int hits = 0;
      bool hit_strict = false;
      for (const auto& p : up.members) {
        if (p.contains(q)) {
          ++hits;
          hit_strict = p.depth < q.depth;
        }
      }
      if (hits != 1) return false;
      if (!hit_strict) strict = false;
    }
    return true;
  };

  bool sa = false, sb = false;
  bool ab = over(a, b, sa);
  bool ba = over(b, a, sb);
  if (ab && ba && a.members == b.members) return {FamilyOrder::equal, false};
  if (ab) return {FamilyOrder::a_over_b, sa};
  if (ba) return {FamilyOrder::b_over_a, sb};
  return {FamilyOrder::incomparable, false};
}

namespace {

int sweep_axis(const std::vector<GeomCube>& cubes, const std::vector<int>& active, int axis) {
  const int dim = cubes[active[0]].dim;
  std::vector<double> coords;
  coords.reserve(2 * active.size());
  for (int idx : active) {
    coords.push_back(cubes[idx].lo(axis));
    coords.push_back(cubes[idx].hi(axis));
  }
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());

  int best = 0;
  std::vector<int> sub;
  for (double c : coords) {
    sub.clear();
    for (int idx : active)
      if (cubes[idx].lo(axis) <= c && c <= cubes[idx].hi(axis)) sub.push_back(idx);
    if (int(sub.size()) <= best) continue;
    if (axis + 1 == dim)
      best = int(sub.size());
    else
      best = std::max(best, sweep_axis(cubes, sub, axis + 1));
  }
  return best;
}

}  // namespace

int covering_multiplicity(const std::vector<GeomCube>& cubes) {
  if (cubes.empty()) return 0;
  if (cubes.size() > 4096)
    throw resource_error("covering_multiplicity: family too large for the exact sweep");
  std::vector<int> all(cubes.size());
  for (std::size_t i = 0; i < cubes.size(); ++i) all[int(i)] = int(i);
  return sweep_axis(cubes, all, 0);
}

std::vector<GeomCube> dilated_level_family(int dim, int depth, double c) {
  require(dim >= 1 && dim <= kMaxDim, "dilated_level_family: dim out of range");
  require(depth >= 0 && depth <= 20 && dim * depth <= 24, "dilated_level_family: level too deep");
  std::vector<GeomCube> out;
  std::int64_t n = std::int64_t(1) << depth;
  Corner m{};
  while (true) {
    CubeIndex q{dim, depth, m};
    out.push_back(dilate(q, c));
    int axis = 0;
    while (axis < dim && ++m[axis] == n) m[axis++] = 0;
    if (axis == dim) break;
  }
  return out;
}

}  // namespace dhc
