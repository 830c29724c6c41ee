#include "doctest.h"
#include "ri/lattice.hpp"

using namespace ri;

TEST_CASE("points and boxes") {
  CHECK_THROWS_AS(Point(2), DimensionError);
  CHECK_THROWS_AS(Point(kMaxDim + 1), DimensionError);
  const Point a{1, 2, 3}, b{0, 2, 5};
  CHECK(linf_dist(a, b) == 2);
  CHECK(l1_norm(a - b) == 3);
  CHECK(adjacent(a, Point{1, 2, 4}));
  CHECK_FALSE(adjacent(a, Point{2, 3, 3}));
  CHECK(star_adjacent(a, Point{2, 3, 4}));
  CHECK(neighbors(a, false).size() == 6);
  CHECK(neighbors(a, true).size() == 26);
  CHECK(ball(3, 2).size() == 125);
  CHECK(ball(4, 1).size() == 81);
}

TEST_CASE("boundaries of a box") {
  const PointSet B = PointSet::from_box(ball(3, 2));
  CHECK(boundary(B).size() == 125 - 27);
  // Outer boundary: the six faces of B_3 without edges and corners.
  CHECK(outer_boundary(B).size() == 6 * 25);
  CHECK(closure(B).size() == 125 + 150);
  CHECK(is_subset(boundary(B), B));
  CHECK(set_intersection(outer_boundary(B), B).empty());
}

TEST_CASE("set algebra") {
  const PointSet A({Point{0, 0, 0}, Point{1, 0, 0}, Point{2, 0, 0}});
  const PointSet B({Point{2, 0, 0}, Point{3, 0, 0}});
  CHECK(set_union(A, B).size() == 4);
  CHECK(set_intersection(A, B).size() == 1);
  CHECK(set_difference(A, B).size() == 2);
  CHECK(linf_distance(A, B) == 0);
  CHECK(linf_distance(set_difference(A, B), set_difference(B, A)) == 2);
}

TEST_CASE("tube geometry") {
  Tube T;
  T.base = Point{0, 0, 0};
  T.axis = 1;
  T.L = 2;
  T.N = 5;
  const Cuboid c = T.cuboid();
  CHECK(c.lo == Point{-2, -2, -2});
  CHECK(c.hi == Point{2, 7, 2});
  CHECK(T.left_face().lo[1] == -2);
  CHECK(T.left_face().hi[1] == -2);
  CHECK(T.right_face().lo[1] == 7);
  CHECK(T.contains(Point{0, 7, 2}));
  CHECK_FALSE(T.contains(Point{0, 8, 0}));
  CHECK(PointSet::from_tube(T).size() == 5 * 10 * 5);
}

TEST_CASE("cuboid gaps") {
  const Cuboid a{Point{0, 0, 0}, Point{1, 1, 1}}, b{Point{3, 0, 5}, Point{4, 1, 6}};
  CHECK(a.l1_gap(b) == 2 + 4);
  CHECK(a.linf_gap(b) == 4);
  CHECK(a.intersect(b).empty());
  CHECK(a.grown(4).intersect(b).size() > 0);
}
