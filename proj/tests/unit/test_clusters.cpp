#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "../support/cluster_oracle.hpp"
#include "doctest.h"
#include "ri/clusters.hpp"

using namespace ri;
using namespace ri::testing;

namespace {

LevelField make_field(Coord R, const std::function<double(const Point&)>& label) {
  const Box b = ball(3, R);
  const CuboidIndex idx(b.cuboid());
  std::vector<double> lab(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) lab[k] = label(idx.point(k));
  return LevelField(b, std::move(lab));
}

constexpr double kClosed = 0.0;  // occupied at every level
constexpr double kOpen = 100.0;  // vacant at every level used here

LevelField random_field(Coord R, RngStream& rng) {
  const Box b = ball(3, R);
  const CuboidIndex idx(b.cuboid());
  std::vector<double> lab(idx.size());
  for (auto& x : lab) x = rng.uniform();
  return LevelField(b, std::move(lab));
}

}  // namespace

TEST_CASE("decompose simple sets") {
  const PointSet dom = PointSet::from_box(ball(3, 3));
  const auto one = decompose(dom, dom);
  CHECK(one.count() == 1);
  CHECK(one.sizes[0] == 343);
  CHECK(one.diameters[0] == 6);
  CHECK(one.touches_boundary[0] == 1);
  const auto two = decompose(PointSet({Point{-3, -3, -3}, Point{3, 3, 3}}), dom);
  CHECK(two.count() == 2);
  CHECK(two.diameters == std::vector<Coord>{0, 0});
  const auto inner = decompose(PointSet({Point{0, 0, 0}, Point{1, 0, 0}}), dom);
  CHECK(inner.count() == 1);
  CHECK(inner.touches_boundary[0] == 0);
  // Diagonal neighbours are not nearest neighbours.
  CHECK(decompose(PointSet({Point{0, 0, 0}, Point{1, 1, 0}}), dom).count() == 2);
  CHECK_THROWS_AS(decompose(PointSet({Point{4, 0, 0}}), dom), std::invalid_argument);
}

TEST_CASE("decompose matches BFS on random fields") {
  RngStream rng(21, 0);
  for (int t = 0; t < 20; ++t) {
    const LevelField f = random_field(5, rng);
    const double u = 0.5 + 0.02 * t;
    std::vector<Point> vac;
    for (const auto& p : ball(3, 5).cuboid().points())
      if (f.vacant(p, u)) vac.push_back(p);
    const auto cd = decompose(PointSet(vac), PointSet::from_box(ball(3, 5)));
    auto oracle = bfs_components(f, 5, [&](const Point&) { return u; });
    REQUIRE(cd.count() == oracle.size());
    std::multiset<std::pair<std::size_t, Coord>> a, b;
    for (std::size_t c = 0; c < cd.count(); ++c) a.insert({cd.sizes[c], cd.diameters[c]});
    for (const auto& c : oracle) b.insert({c.size(), diameter(c)});
    CHECK(a == b);
  }
}

TEST_CASE("exist and disconnect against BFS") {
  RngStream rng(22, 0);
  for (int t = 0; t < 20; ++t) {
    const LevelField f = random_field(10, rng);
    const double u = 0.6 + 0.01 * t;
    for (Coord r : {5, 10}) {
      const auto comps = bfs_components(f, r, [&](const Point&) { return u; });
      bool ex = false;
      for (const auto& c : comps) ex = ex || 5 * diameter(c) >= r;
      CHECK(detect_exist(f, r, u) == ex);
    }
    const auto comps = bfs_components(f, 10, [&](const Point&) { return u; });
    bool cross = false;
    for (const auto& c : comps) cross = cross || (min_depth(c) <= 3 && max_depth(c) == 10);
    CHECK(detect_disconnect(f, 3, 10, u) == !cross);
  }
}

TEST_CASE("unique and uc against BFS") {
  RngStream rng(25, 0);
  for (int t = 0; t < 20; ++t) {
    const LevelField f = random_field(12, rng);
    const double u = 0.6 + 0.01 * t, v = u - 0.1;
    CHECK(detect_unique(f, 6, u, v) == unique_oracle(f, 6, u, v));
    CHECK(detect_uc(f, 2, u, v) == uc_oracle(f, 2, u, v));
  }
}

TEST_CASE("exist threshold on a segment") {
  const Coord r = 20;
  for (Coord len : {4, 5}) {
    const LevelField f = make_field(r, [&](const Point& p) {
      return p[1] == 0 && p[2] == 0 && p[0] >= 0 && p[0] < len ? kOpen : kClosed;
    });
    CHECK(detect_exist(f, r, 1.0) == (5 * (len - 1) >= r));
  }
}

TEST_CASE("unique with and without a sprinkled corridor") {
  auto field = [](bool corridor) {
    return make_field(20, [=](const Point& p) {
      if (p[2] != 0) return kClosed;
      if (p[1] == -3 && p[0] >= -1 && p[0] <= 1) return kOpen;
      if (p[1] == 3 && p[0] >= -1 && p[0] <= 1) return kOpen;
      if (corridor && p[0] == 0 && std::abs(p[1]) < 3) return 0.9;
      return kClosed;
    });
  };
  CHECK_FALSE(detect_unique(field(false), 10, 1.0, 0.5));
  CHECK(detect_unique(field(true), 10, 1.0, 0.5));
  // At level 1 the corridor is closed, so the two segments stay apart.
  CHECK_FALSE(detect_unique(field(true), 10, 1.0, 0.95));
  CHECK_THROWS_AS(detect_unique(field(true), 10, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("uc on crossing lines") {
  const Coord M = 3;
  auto field = [](bool second, bool corridor) {
    return make_field(18, [=](const Point& p) {
      if (p[2] != 0) return kClosed;
      if (p[1] == 0 && p[0] >= 0) return kOpen;                 // B_M to the boundary of B_6M
      if (second && p[0] == -5 && p[1] >= -12 && p[1] <= -2) return kOpen;
      if (corridor && p[1] == -2 && p[0] > -5 && p[0] < 0) return 0.9;
      if (corridor && p[0] == -1 && p[1] == -1) return 0.9;
      if (corridor && p[0] == -1 && p[1] == 0) return 0.9;
      return kClosed;
    });
  };
  CHECK(detect_uc(field(false, false), M, 1.0, 0.5));
  CHECK_FALSE(detect_uc(field(true, false), M, 1.0, 0.5));
  CHECK(detect_uc(field(true, true), M, 1.0, 0.5));
  const LevelField closed = make_field(18, [](const Point&) { return kClosed; });
  CHECK_FALSE(detect_uc(closed, M, 1.0, 0.5));
}

TEST_CASE("disconnect on a ray") {
  auto field = [](Coord gap) {
    return make_field(10, [=](const Point& p) {
      return p[1] == 0 && p[2] == 0 && p[0] >= 0 && p[0] != gap ? kOpen : kClosed;
    });
  };
  CHECK_FALSE(detect_disconnect(field(-1), 2, 10, 1.0));
  CHECK(detect_disconnect(field(7), 2, 10, 1.0));
  CHECK_THROWS_AS(detect_disconnect(field(7), 11, 10, 1.0), std::invalid_argument);
}

TEST_CASE("class counts against a BFS oracle") {
  const Coord M = 4;
  RngStream rng(23, 0);
  for (int t = 0; t < 4; ++t) {
    const LevelField f = random_field(16, rng);
    const double u = 0.68, delta = 0.08;
    const ClassCounts cc = class_counts(f, M, 1, u, delta);
    REQUIRE(cc.imax == 2);
    CHECK(cc.v_radius == std::vector<Coord>{16, 14, 12, 10, 8});

    // Ground clusters: V^u components of B_16 meeting its boundary.
    const auto ground = bfs_components(f, 16, [&](const Point&) { return u; });
    std::vector<std::vector<Point>> gc;
    for (const auto& c : ground)
      if (max_depth(c) == 16) gc.push_back(c);
    CHECK(cc.n_clusters == gc.size());

    CHECK(cc.U_eta == class_oracle(f, M, 1, u, delta, cc.v_radius, cc.imax));
    for (int i = 0; i <= cc.imax; ++i)
      CHECK(cc.U_diag[static_cast<std::size_t>(i)] ==
            class_oracle(f, M, i, u, delta, cc.v_radius, cc.imax)[static_cast<std::size_t>(i)]);
    for (int i = 0; i < cc.imax; ++i) {
      const auto k = static_cast<std::size_t>(i);
      CHECK(cc.U_eta[k] == cc.U_eta[k + 1] + cc.U_step[k]);
      CHECK(cc.U_half[k] <= cc.U_step[k]);
    }
    CHECK(cc.U_diag[1] == cc.U_eta[1]);
    // The merged family lists each retained cluster once.
    std::set<std::size_t> members;
    for (const auto& cls : cc.tilde)
      for (auto c : cls) CHECK(members.insert(c).second);
  }
}

TEST_CASE("class counts with no sprinkling count clusters") {
  RngStream rng(24, 0);
  const LevelField f = random_field(16, rng);
  const ClassCounts cc = class_counts(f, 4, 0, 0.7, 0.0);
  CHECK(cc.U_eta[0] == cc.n_clusters);
  CHECK_THROWS_AS(class_counts(f, 4, 3, 0.7, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(class_counts(f, 5, 0, 0.7, 0.1), std::invalid_argument);
}

TEST_CASE("m_of_r") {
  CHECK(m_of_r(std::exp(2.0), 2.0) == static_cast<Coord>(std::floor(std::exp(4.0))));
  bool of = false;
  m_of_r(1e6, 3.0, &of);
  CHECK(of);
  CHECK_THROWS_AS(m_of_r(10, 1.0), std::invalid_argument);
}
