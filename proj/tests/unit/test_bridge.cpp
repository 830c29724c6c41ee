#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "ri/bridge.hpp"
#include "ri/rng.hpp"

using namespace ri;

namespace {

Tube tube(Coord L, Coord N, int axis = 0) {
  Tube T;
  T.base = Point(3);
  T.axis = axis;
  T.L = L;
  T.N = N;
  return T;
}

// Tube of half-width 3 along x from -3 to 23; one marked box in the middle and
// three unit holes on each side.
Bridge hand_bridge() {
  Bridge b;
  b.tube = tube(3, 20);
  b.s = 1;
  b.s_prime = 0.5;
  b.m = 2.5;
  b.xi = 0.5;
  BridgeBox mid{Box(Point{10, 0, 0}, 3), std::array<Point, 2>{Point{7, 0, 0}, Point{13, 0, 0}}};
  b.levels.push_back({mid});
  std::vector<BridgeBox> holes;
  for (Coord c : {-1, 2, 5, 15, 18, 21}) holes.push_back({Box(Point{c, 0, 0}, 1), std::nullopt});
  b.levels.push_back(holes);
  return b;
}

BridgeReport check_faces(const Bridge& b) {
  return validate_bridge(b, CuboidUnion::of_cuboid(b.tube.left_face()), CuboidUnion::of_cuboid(b.tube.right_face()));
}

PointSet walk_cluster(RngStream& g, const Tube& T, int steps) {
  const Cuboid c = T.cuboid();
  Point p(3);
  for (int i = 0; i < 3; ++i) p[i] = c.lo[i] + static_cast<Coord>(g.below(static_cast<std::uint64_t>(c.hi[i] - c.lo[i] + 1)));
  std::vector<Point> v{p};
  for (int t = 0; t < steps; ++t) {
    p[static_cast<int>(g.below(3))] += g.below(2) ? 1 : -1;
    v.push_back(p);
  }
  return PointSet(std::move(v));
}

}  // namespace

TEST_CASE("hand-built two-level bridge validates") {
  const BridgeReport r = check_faces(hand_bridge());
  CHECK_MESSAGE(r.ok(), r.summary());
  CHECK(r.J == 2);
  CHECK(r.boxes == 7);
}

TEST_CASE("injected violations are caught") {
  {
    Bridge b = hand_bridge();
    b.levels[1].erase(b.levels[1].begin() + 1);  // gap between C and the marked box
    const auto r = check_faces(b);
    CHECK_FALSE(r.b2.ok);
  }
  {
    Bridge b = hand_bridge();
    (*b.levels[0][0].marked)[0] = Point{8, 0, 0};  // not on the box boundary
    CHECK_FALSE(check_faces(b).b2.ok);
  }
  {
    Bridge b = hand_bridge();
    b.levels[0][0].marked.reset();
    CHECK_FALSE(check_faces(b).b2.ok);
  }
  {
    Bridge b = hand_bridge();
    b.levels[0].push_back(b.levels[0][0]);  // a level-0 box meeting another after inflation
    CHECK_FALSE(check_faces(b).b1.ok);
  }
  {
    Bridge b = hand_bridge();
    b.s_prime = 1.5;  // holes collide once inflated by s'
    CHECK_FALSE(check_faces(b).b1.ok);
  }
  {
    Bridge b = hand_bridge();
    b.levels[1][0].box.radius = 2;  // hole above s
    CHECK_FALSE(check_faces(b).b3.ok);
  }
  {
    Bridge b = hand_bridge();
    b.s_prime = 4;  // marked box below s'
    CHECK_FALSE(check_faces(b).b3.ok);
  }
  {
    Bridge b = hand_bridge();
    b.levels[1][0].box.center = Point{-1, 4, 0};
    CHECK_FALSE(check_faces(b).containment.ok);
  }
  {
    Bridge b = hand_bridge();
    b.m = 1;  // J = 2 exceeds log log(3 e^2)
    CHECK_FALSE(check_faces(b).b4.ok);
  }
}

TEST_CASE("one-dimensional bridge") {
  const double R = 100, r = 25, xi = 0.6;
  const auto I = interval_bridge(R, r, xi);
  CHECK(check_interval_bridge(I, R, r, xi).ok);
  CHECK(I.size() <= 5);
  const double q = std::pow(r, xi);
  for (std::size_t i = 0; i < I.size(); ++i) {
    CHECK(I[i].first >= 0);
    CHECK(I[i].second <= R);
    CHECK(I[i].second - I[i].first >= q - 1e-9);
    CHECK(I[i].second - I[i].first <= r + 1e-9);
    if (i + 1 < I.size()) CHECK(I[i + 1].first - I[i].second == doctest::Approx(2 * q));
  }
  for (double RR : {40.0, 77.5, 1000.0, 12345.0})
    for (double rr : {interval_floor(xi), 10.0, RR / 4})
      if (rr >= interval_floor(xi) && rr <= RR / 4) CHECK(check_interval_bridge(interval_bridge(RR, rr, xi), RR, rr, xi).ok);
  CHECK_THROWS_AS(interval_bridge(R, 1.0, xi), BridgeError);
  CHECK_THROWS_AS(interval_bridge(R, 26.0, xi), BridgeError);
  CHECK_FALSE(check_interval_bridge({{0, 10}}, R, r, xi).ok);
}

TEST_CASE("coarse path rounds") {
  const Tube T = tube(64, 0);
  const CoarsePath p = coarse_path(T, Point{-64, 5, -7}, Point{64, -30, 60}, 16, -1, true);
  CHECK(p.depth == coarse_depth(64, 16));
  CHECK(p.depth == 6);
  const Check c = check_coarse_path(p, 16);
  CHECK_MESSAGE(c.ok, c.message);
  REQUIRE(p.rounds.size() == static_cast<std::size_t>(p.depth) + 1);
  for (int k = 0; k <= p.depth; ++k) {
    const Check ck = check_coarse_round(p, k);
    CHECK_MESSAGE(ck.ok, ck.message);
  }
  for (std::size_t i = 0; i + 1 < p.boxes.size(); ++i) CHECK(dyadic_adjacent(p, p.boxes[i], p.boxes[i + 1]));
  CHECK_THROWS_AS(coarse_path(T, Point{-63, 0, 0}, Point{64, 0, 0}, 16), BridgeError);
}

TEST_CASE("faces case across scales") {
  for (double xi : {0.55, 0.6, 0.75}) {
    const double s = specialized_floor(xi);
    for (Coord L = 64; L <= 4096; L *= 2) {
      if (static_cast<double>(L) < s) continue;
      for (Coord N : {Coord{0}, 5 * L}) {
        const Tube T = tube(L, N);
        const Bridge b = specialized_bridge(T, s, xi);
        const BridgeReport r = check_faces(b);
        CHECK_MESSAGE(r.ok(), "xi=" << xi << " L=" << L << " N=" << N << ": " << r.summary());
        CHECK(static_cast<double>(b.J()) <= std::log(std::log(10.0 * static_cast<double>(L))) / std::log(1 / xi) + 1e-12);
        const auto fam = specialized_intervals(static_cast<double>(L), static_cast<double>(N), s, xi);
        for (std::size_t j = 0; j + 1 < fam.levels.size(); ++j)
          CHECK(fam.levels[j + 1].size() <= 8 * fam.levels[j].size());
      }
    }
  }
}

TEST_CASE("parameter floors") {
  CHECK(interval_floor(0.6) == doctest::Approx(std::pow(3.0, 2.5)));
  CHECK(specialized_floor(0.55) == 64);
  CHECK(specialized_floor(0.75) == doctest::Approx(4 * 81.0));
  CHECK(default_s_min(0.75) == doctest::Approx(0.8 * 81.0));
  CHECK_THROWS_AS(specialized_bridge(tube(256, 0), 32, 0.6), BridgeError);
  CHECK_THROWS_AS(specialized_bridge(tube(256, 0), 64, 0.4), BridgeError);
  RngStream g(41, 0);
  const Tube T = tube(128, 50);
  const PointSet C({Point{-100, 0, 0}}), D({Point{150, 0, 0}});
  CHECK_THROWS_AS(general_bridge(C, D, T, 20), BridgeError);
  CHECK_THROWS_AS(general_bridge(C, C, T, 50), std::invalid_argument);
}

TEST_CASE("general bridges between random clusters") {
  RngStream g(42, 0);
  for (int t = 0; t < 30; ++t) {
    const double xi = t % 3 == 0 ? 0.55 : t % 3 == 1 ? 0.6 : 0.75;
    const double s = default_s_min(xi) * (1 + g.uniform());
    const Coord L = static_cast<Coord>(std::ceil(2 * s)) + static_cast<Coord>(g.below(200));
    Tube T = tube(L, static_cast<Coord>(g.below(static_cast<std::uint64_t>(3 * L))), static_cast<int>(g.below(3)));
    PointSet C, D;
    do {
      C = walk_cluster(g, T, 200);
      D = walk_cluster(g, T, 200);
    } while (!set_intersection(C, D).empty());
    BridgeParams prm;
    prm.xi = xi;
    const Bridge b = general_bridge(C, D, T, s, prm);
    const BridgeReport r = validate_bridge(b, C, D);
    CHECK_MESSAGE(r.ok(), r.summary());
  }
}

TEST_CASE("bridge json and svg") {
  const Bridge b = specialized_bridge(tube(64, 64), 64, 0.6);
  std::ostringstream js, svg;
  write_bridge_json(js, b);
  write_bridge_svg(svg, b, 2, 0);
  CHECK(js.str().find("\"levels\"") != std::string::npos);
  CHECK(svg.str().rfind("<svg", 0) == 0);
}
