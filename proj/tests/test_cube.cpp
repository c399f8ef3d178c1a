#include <doctest.h>

#include "dhc/cube.hpp"

using namespace dhc;

TEST_SUITE_BEGIN("cube");

TEST_CASE("index geometry and tree moves") {
  CubeIndex q{2, 3, {5, 2, 0}};
  CHECK(q.side() == 0.125);
  CHECK(q.lo(0) == 0.625);
  CHECK(q.hi(0) == 0.75);
  CHECK(q.center()[1] == doctest::Approx(0.3125));

  CubeIndex p = q.parent();
  CHECK(p.depth == 2);
  CHECK(p.corner[0] == 2);
  CHECK(p.corner[1] == 1);
  CHECK(p.contains(q));
  CHECK_FALSE(q.contains(p));
  CHECK(q.contains(q));

  for (unsigned o = 0; o < 4; ++o) {
    CubeIndex c = q.child(o);
    CHECK(c.parent() == q);
    CHECK(q.contains(c));
  }

  // closed cubes contain their boundary
  CHECK(q.contains_point({0.625, 0.375, 0}));
  CHECK(q.contains_point({0.75, 0.25, 0}));
  CHECK_FALSE(q.contains_point({0.7501, 0.3, 0}));
}

TEST_CASE("negative corners stay consistent") {
  CubeIndex q{1, 2, {-3, 0, 0}};
  CHECK(q.lo(0) == -0.75);
  CHECK(q.parent().corner[0] == -2);
  CHECK(q.parent().contains(q));
}

TEST_CASE("geom cubes, dilation, closed predicates") {
  GeomCube a{2, {0.5, 0.5, 0}, 0.25};
  GeomCube b{2, {1.0, 0.5, 0}, 0.25};
  CHECK(a.meets(b));  // share the face x = 0.75
  CHECK_FALSE(a.contained_in(b));
  CHECK(a.contained_in(GeomCube{2, {0.5, 0.5, 0}, 0.5}));

  CubeIndex q{2, 1, {1, 0, 0}};
  GeomCube g = to_geom(q);
  CHECK(g.center[0] == 0.75);
  CHECK(g.side() == 0.5);
  GeomCube d = dilate(q, 3.0);
  CHECK(d.half_side == 0.75);
  CHECK(d.center == g.center);
  CHECK(g.contained_in(d));
}

TEST_CASE("families sort, dedupe, overlap") {
  CubeIndex r{2, 0, {0, 0, 0}};
  CubeFamily f = make_family(2, {r.child(3), r.child(0), r.child(3), r.child(1)});
  CHECK(f.size() == 3);
  CHECK(cube_less(f.members[0], f.members[1]));
  CHECK(is_non_overlapping(f));

  CubeFamily bad = make_family(2, {r, r.child(2)});
  CHECK_FALSE(is_non_overlapping(bad));

  CHECK(family_content_sum(f, 2.0) == doctest::Approx(0.75).epsilon(1e-15));
  auto [mn, mx] = metric_floor_roof(f);
  CHECK(mn == 0.5);
  CHECK(mx == 0.5);
  CHECK_THROWS_AS(metric_floor_roof(CubeFamily{2, {}}), domain_error);

  CubeFamily inside = restrict_family(f, r.child(0));
  CHECK(inside.size() == 1);
  CHECK(inside.members[0] == r.child(0));
}

TEST_CASE("family partial order") {
  CubeIndex r{2, 0, {0, 0, 0}};
  CubeFamily coarse = make_family(2, {r});
  std::vector<CubeIndex> kids;
  for (unsigned o = 0; o < 4; ++o) kids.push_back(r.child(o));
  CubeFamily fine = make_family(2, kids);

  FamilyCompare c = family_compare(coarse, fine);
  CHECK(c.order == FamilyOrder::a_over_b);
  CHECK(c.strict);

  CHECK(family_compare(fine, fine).order == FamilyOrder::equal);
  CHECK_FALSE(family_compare(fine, fine).strict);

  // mixed depths: {child0, child1} vs {child0 refined, child2}
  CubeFamily a = make_family(2, {r.child(0), r.child(1)});
  CubeFamily b = make_family(2, {r.child(0).child(0), r.child(2)});
  CHECK(family_compare(a, b).order == FamilyOrder::incomparable);

  // self-containment is not strict
  CubeFamily s = make_family(2, {r.child(0), r.child(1).child(0)});
  CubeFamily t = make_family(2, {r.child(0), r.child(1).child(0).child(2)});
  FamilyCompare st = family_compare(s, t);
  CHECK(st.order == FamilyOrder::a_over_b);
  CHECK_FALSE(st.strict);
}

TEST_CASE("covering multiplicity of dilated grids") {
  // Undilated closed cells meet on faces: 2^dim at a shared corner.
  CHECK(covering_multiplicity(dilated_level_family(1, 2, 1.0)) == 2);
  CHECK(covering_multiplicity(dilated_level_family(2, 2, 1.0)) == 4);

  // 3-fold dilation of depth-2 cells: intervals [(2i-2)/8, (2i+4)/8]. The
  // interior multiplicity is 3 per axis, but at 1/2 two more touch by an
  // endpoint, so the closed count is 4 per axis.
  CHECK(covering_multiplicity(dilated_level_family(1, 2, 3.0)) == 4);
  CHECK(covering_multiplicity(dilated_level_family(2, 2, 3.0)) == 16);

  CHECK(dilated_level_family(2, 1, 1.5).size() == 4);
  CHECK(covering_multiplicity({}) == 0);
}

TEST_SUITE_END();
