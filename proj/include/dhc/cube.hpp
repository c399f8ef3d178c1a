#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dhc/util.hpp"

namespace dhc {

using Corner = std::array<std::int64_t, kMaxDim>;
using Point = std::array<double, kMaxDim>;

// Dyadic cube prod_i [m_i/2^k, (m_i+1)/2^k], closed. Corners are signed so
// cubes of the padded boxes around the unit cube stay representable; grid
// sets enforce 0 <= m_i < 2^k where it matters.
struct CubeIndex {
  int dim = 1;
  int depth = 0;  // k
  Corner corner{};  // m

  double side() const { return pow2(-depth); }
  double lo(int axis) const { return double(corner[axis]) * side(); }
  double hi(int axis) const { return double(corner[axis] + 1) * side(); }
  Point center() const;

  bool contains(const CubeIndex& q) const;    // closed containment
  bool contains_point(const Point& x) const;  // closed
  CubeIndex parent() const;
  CubeIndex child(unsigned octant) const;

  bool operator==(const CubeIndex& o) const = default;
};

// Canonical member order: depth ascending, then corner lexicographic.
bool cube_less(const CubeIndex& a, const CubeIndex& b);

std::string cube_to_string(const CubeIndex& q);

// Axis-aligned closed cube given by center and half-side (Q_l(x) with
// half-side l; side length 2l). half_side 0 is a point cube.
struct GeomCube {
  int dim = 1;
  Point center{};
  double half_side = 0.0;

  double side() const { return 2.0 * half_side; }
  double lo(int axis) const { return center[axis] - half_side; }
  double hi(int axis) const { return center[axis] + half_side; }

  bool contains_point(const Point& x) const;
  bool meets(const GeomCube& o) const;        // closed intersection
  bool contained_in(const GeomCube& o) const;
};

GeomCube to_geom(const CubeIndex& q);

// c-dilation about the center: same center, half-side scaled by c.
GeomCube dilate(const CubeIndex& q, double c);
GeomCube dilate(const GeomCube& q, double c);

// Finite family of dyadic cubes in canonical order, no duplicates.
struct CubeFamily {
  int dim = 1;
  std::vector<CubeIndex> members;

  std::size_t size() const { return members.size(); }
  bool empty() const { return members.empty(); }
};

CubeFamily make_family(int dim, std::vector<CubeIndex> members);  // sorts, dedupes
bool is_non_overlapping(const CubeFamily& f);

// sum of (side length)^d over members
double family_content_sum(const CubeFamily& f, double d);

// (min side, max side); domain error on empty family
std::pair<double, double> metric_floor_roof(const CubeFamily& f);

// members contained in q (closed containment)
CubeFamily restrict_family(const CubeFamily& f, const CubeIndex& q);

enum class FamilyOrder { equal, a_over_b, b_over_a, incomparable };

struct FamilyCompare {
  FamilyOrder order = FamilyOrder::incomparable;
  bool strict = false;  // every containment uses a strictly larger cube
};

// Partial order on non-overlapping families: a over b when every member of b
// lies in exactly one member of a.
FamilyCompare family_compare(const CubeFamily& a, const CubeFamily& b);

// Exact covering multiplicity of a finite family of closed cubes: the maximum
// number of members sharing one point. Sweeps the coordinate grid induced by
// the faces, so it is exact but meant for modest family sizes.
int covering_multiplicity(const std::vector<GeomCube>& cubes);

// Members of c-dilated depth-k dyadic cubes meeting the unit box, as a
// concrete family for multiplicity experiments.
std::vector<GeomCube> dilated_level_family(int dim, int depth, double c);

}  // namespace dhc
