#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "doctest.h"
#include "ri/excursion.hpp"

using namespace ri;

namespace {

std::vector<Point> line(Coord from, Coord to, Coord y = 0) {
  std::vector<Point> p;
  const Coord step = from <= to ? 1 : -1;
  for (Coord x = from;; x += step) {
    p.push_back(Point{x, y, 0});
    if (x == to) break;
  }
  return p;
}

LabeledTrajectory make_traj(const Window& w, double label, const std::vector<Point>& path) {
  LabeledTrajectory t;
  t.label = label;
  t.anchor = path.front();
  t.fwd = path;
  t.bwd = {path.front()};
  for (const auto& p : path) {
    const auto k = w.index_of(p);
    if (k >= 0) t.visits.push_back(static_cast<std::uint32_t>(k));
  }
  return t;
}

InterlacementSample fixture(Coord R, double u_max, std::vector<std::pair<double, std::vector<Point>>> trajs) {
  InterlacementSample s;
  s.window = std::make_shared<const Window>(Window::box(ball(3, R)));
  s.u_max = u_max;
  s.mode = PathMode::kFull;
  for (auto& [l, p] : trajs) s.trajectories.push_back(make_traj(*s.window, l, p));
  s.rebuild_fields();
  return s;
}

}  // namespace

TEST_CASE("excursion times on a seven-step path") {
  const PointSet A = PointSet::from_box(ball(3, 1)), U = PointSet::from_box(ball(3, 2));
  const std::vector<Point> path{Point{3, 0, 0}, Point{2, 0, 0}, Point{1, 0, 0}, Point{2, 0, 0},
                                Point{3, 0, 0}, Point{2, 0, 0}, Point{1, 0, 0}, Point{0, 0, 0}};
  const auto e = decompose_excursions(path, A, U);
  REQUIRE(e.size() == 2);
  CHECK(e[0].start == 2);
  CHECK(e[0].end == 4);
  CHECK(e[0].exit_seen);
  CHECK(e[1].start == 6);
  CHECK(e[1].end == 7);
  CHECK_FALSE(e[1].exit_seen);
  CHECK(decompose_excursions(line(5, 2), A, U).empty());
  CHECK_THROWS_AS(decompose_excursions(path, U, A), std::invalid_argument);
}

TEST_CASE("clothesline of a sampled configuration") {
  SamplerOptions o;
  o.mode = PathMode::kFull;
  o.truncation_radius = 40;
  const InterlacementSampler sampler(Window::box(ball(3, 5)), o);
  const PointSet B = PointSet::from_box(ball(3, 2)), A = PointSet::from_box(ball(3, 3)),
                 U = PointSet::from_box(ball(3, 4));
  RngStream rng(51, 0);
  std::mt19937 shuffle_rng(5);
  std::size_t total = 0;
  for (int t = 0; t < 40; ++t) {
    const auto s = sampler.sample(1.0, rng);
    const Clothesline c = build_clothesline(s, A, U);
    CHECK(c.pending == 0);
    CHECK(std::is_sorted(c.records.begin(), c.records.end(), clothesline_less));
    auto shuffled = c.records;
    std::shuffle(shuffled.begin(), shuffled.end(), shuffle_rng);
    std::sort(shuffled.begin(), shuffled.end(), clothesline_less);
    for (std::size_t i = 0; i < shuffled.size(); ++i) {
      CHECK(shuffled[i].traj == c.records[i].traj);
      CHECK(shuffled[i].k == c.records[i].k);
    }
    for (const auto& r : c.records) {
      CHECK(A.contains(r.entry));
      CHECK_FALSE(U.contains(r.exit));
      CHECK(linf_norm(r.exit) == 5);
    }
    CHECK(c.multiset(0.3).size() == c.sequence(0.3).size());
    total += c.records.size();
    for (double u : {0.3, 1.0}) {
      const InnerView v = restrict_to_inner(s, B, A, U, u);
      CHECK(v.range_in_B == occupied_in(s, B, u));
      CHECK(v.records.size() == c.sequence(u).size());
      for (const auto& r : v.records)
        if (!r.cemetery) {
          CHECK(B.contains(r.path.front()));
          CHECK(A.contains(r.path.back()));
        }
    }
  }
  CHECK(total > 0);
}

TEST_CASE("clothesline needs a full sample and a window holding A") {
  SamplerOptions o;
  o.mode = PathMode::kTrace;
  const InterlacementSampler trace(Window::box(ball(3, 2)), o);
  RngStream rng(52, 0);
  const auto s = trace.sample(1.0, rng);
  CHECK_THROWS_AS(build_clothesline(s, PointSet::from_box(ball(3, 1)), PointSet::from_box(ball(3, 2))),
                  std::invalid_argument);
  const auto f = fixture(2, 1.0, {});
  CHECK_THROWS_AS(build_clothesline(f, PointSet::from_box(ball(3, 3)), PointSet::from_box(ball(3, 4))),
                  std::invalid_argument);
}

TEST_CASE("rounded boxes") {
  CHECK(rounded_box_b(3) == doctest::Approx(15.0 / 14.0));
  const Coord r = 6;
  const RoundedBoxes rb = rounded_boxes(3, r);
  CHECK(rb.s == doctest::Approx(std::pow(6.0, 14.0 / 15.0)));
  const Coord R = static_cast<Coord>(std::floor(r + rb.s));
  CHECK(is_subset(PointSet::from_box(ball(3, R)), rb.A));
  CHECK(is_subset(rb.A, rb.U));
  CHECK(rb.A.size() < rb.U.size());
  // A corner at distance just above s from B_R is left out.
  const Coord k = static_cast<Coord>(std::floor(rb.s / std::sqrt(3.0))) + 1;
  CHECK_FALSE(rb.A.contains(Point{R + k, R + k, R + k}));
  CHECK(rb.A.contains(Point{R + static_cast<Coord>(std::floor(rb.s)), 0, 0}));
}

TEST_CASE("finite-energy events on fixtures") {
  const Box B(Point{0, 0, 0}, 1);
  const auto lv = FiniteEnergyLevels::standard(1.0, 0.1);  // F2 window (0.9, 0.95]
  {
    const auto e = detect_finite_energy_good(fixture(9, 1.0, {}), B, 1, lv);
    CHECK(e.f1);
    CHECK_FALSE(e.f2);
    CHECK(e.f3);
  }
  {
    // A straight line through B: both sides of the annulus occupied but not connected around B.
    const auto e = detect_finite_energy_good(fixture(9, 1.0, {{0.95, line(-9, 9)}}), B, 1, lv);
    CHECK_FALSE(e.f1);
    CHECK(e.f2);
    CHECK(e.f3);
  }
  for (double l : {0.9, 0.97}) {
    const auto e = detect_finite_energy_good(fixture(9, 1.0, {{l, line(-9, 9)}}), B, 1, lv);
    CHECK_FALSE(e.f2);
  }
  {
    // A line in the annulus stays in one component.
    const auto e = detect_finite_energy_good(fixture(9, 1.0, {{0.5, line(-9, 9, 6)}}), B, 1, lv);
    CHECK(e.f1);
    CHECK_FALSE(e.f2);
    CHECK(e.f3);
  }
  {
    // A back-and-forth spike visits a site twice.
    auto p = line(9, 4);
    auto back = line(5, 9);
    p.insert(p.end(), back.begin(), back.end());
    const auto s = fixture(9, 1.0, {{0.5, p}});
    CHECK_FALSE(detect_finite_energy_good(s, B, 1, lv).f3);
    // Two visits are allowed once r0 = 2.
    CHECK(detect_finite_energy_good(fixture(17, 1.0, {{0.5, p}}), B, 2, lv).f3);
  }
  CHECK_THROWS_AS(detect_finite_energy_good(fixture(8, 1.0, {}), B, 1, lv), WindowTooSmall);
  CHECK_THROWS_AS(detect_finite_energy_good(fixture(9, 1.0, {}), B, 1, FiniteEnergyLevels{1, 1, 1, 0.2, 0.1}),
                  std::invalid_argument);
}

TEST_CASE("F3 is monotone in the top level") {
  SamplerOptions o;
  o.mode = PathMode::kTrace;
  const InterlacementSampler sampler(Window::box(ball(3, 9)), o);
  RngStream rng(53, 0);
  const Box B(Point{0, 0, 0}, 1);
  for (int t = 0; t < 10; ++t) {
    const auto s = sampler.sample(2.0, rng);
    const auto hi = detect_finite_energy_good(s, B, 1, {2.0, 1.0, 1.0, 0.05, 0.1});
    const auto lo = detect_finite_energy_good(s, B, 1, {1.0, 1.0, 1.0, 0.05, 0.1});
    if (hi.f3) CHECK(lo.f3);
    CHECK(hi.f1 == lo.f1);
    CHECK(hi.f2 == lo.f2);
  }
}

TEST_CASE("clothesline csv") {
  const auto s = fixture(5, 1.0, {{0.25, line(-5, 5)}});
  const Clothesline c = build_clothesline(s, PointSet::from_box(ball(3, 1)), PointSet::from_box(ball(3, 2)));
  REQUIRE(c.records.size() == 1);
  std::ostringstream os;
  write_clothesline_csv(os, c, 3);
  CHECK(os.str() == "traj_id,k,entry_1,entry_2,entry_3,exit_1,exit_2,exit_3,label\n0,1,-1,0,0,3,0,0,0.25\n");
}
