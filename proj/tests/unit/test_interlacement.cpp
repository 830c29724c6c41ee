#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "ri/interlacement.hpp"
#include "ri/potential.hpp"

using namespace ri;

namespace {

SamplerOptions opts(PathMode m, Coord R = 0) {
  SamplerOptions o;
  o.mode = m;
  o.truncation_radius = R;
  return o;
}

}  // namespace

TEST_CASE("level zero gives an empty sample") {
  const InterlacementSampler s(Window::box(ball(3, 2)), opts(PathMode::kFull));
  RngStream rng(1, 0);
  const auto x = s.sample(0.0, rng);
  CHECK(x.trajectories.empty());
  CHECK(x.count_at_level(0.0) == 0);
  CHECK_THROWS_AS(x.vacant_at_level(0.0), std::out_of_range);
  for (auto o : x.occupation) CHECK(o == 0);
}

TEST_CASE("full-mode sample structure") {
  const Window w = Window::box(ball(3, 2));
  const InterlacementSampler s(w, opts(PathMode::kFull, 30));
  RngStream rng(2, 0);
  for (int t = 0; t < 20; ++t) {
    const auto x = s.sample(1.5, rng);
    double prev = 0;
    std::vector<std::uint32_t> occ(w.size(), 0);
    std::vector<double> first(w.size(), kNeverVisited);
    for (const auto& tr : x.trajectories) {
      CHECK(tr.label > prev);
      CHECK(tr.label <= 1.5);
      prev = tr.label;
      REQUIRE(!tr.fwd.empty());
      REQUIRE(!tr.bwd.empty());
      CHECK(tr.fwd.front() == tr.anchor);
      CHECK(tr.bwd.front() == tr.anchor);
      // The anchor lies on the inner boundary of the window.
      CHECK(linf_norm(tr.anchor) == 2);
      // The backward part never returns.
      for (std::size_t i = 1; i < tr.bwd.size(); ++i) CHECK(w.index_of(tr.bwd[i]) < 0);
      CHECK(linf_norm(tr.fwd.back()) > 30);
      CHECK(linf_norm(tr.bwd.back()) > 30);
      const auto path = tr.two_sided();
      CHECK(path.size() == tr.fwd.size() + tr.bwd.size() - 1);
      for (std::size_t i = 0; i + 1 < path.size(); ++i) CHECK(adjacent(path[i], path[i + 1]));
      std::size_t nvis = 0;
      for (const auto& p : path) {
        const auto k = w.index_of(p);
        if (k < 0) continue;
        ++occ[static_cast<std::size_t>(k)];
        first[static_cast<std::size_t>(k)] = std::min(first[static_cast<std::size_t>(k)], tr.label);
        ++nvis;
      }
      CHECK(nvis == tr.visits.size());
    }
    CHECK(occ == x.occupation);
    CHECK(first == x.first_label);
    auto copy = x;
    copy.rebuild_fields();
    CHECK(copy.occupation == x.occupation);
    CHECK(copy.first_label == x.first_label);
    // Vacant sets decrease with the level.
    CHECK(is_subset(x.vacant_at_level(1.0), x.vacant_at_level(0.5)));
    CHECK(x.vacant_at_level(1.0).size() + x.occupied_at_level(1.0).size() == w.size());
    CHECK(x.count_at_level(0.5) <= x.count_at_level(1.0));
  }
}

TEST_CASE("trajectory count at a point is Poisson(u cap)") {
  const Window w(PointSet({Point{0, 0, 0}}));
  const InterlacementSampler s(w, opts(PathMode::kTrace));
  CHECK(s.capacity() == doctest::Approx(1 / 1.516386059151978).epsilon(1e-9));
  RngStream rng(3, 0);
  const int n = 4000;
  double sum = 0, sum2 = 0;
  for (int t = 0; t < n; ++t) {
    const double c = static_cast<double>(s.sample(1.0, rng).count_at_level(1.0));
    sum += c;
    sum2 += c * c;
  }
  const double mean = sum / n, var = sum2 / n - mean * mean;
  const double lam = s.capacity();
  CHECK(std::abs(mean - lam) < 4 * std::sqrt(lam / n));
  CHECK(var == doctest::Approx(lam).epsilon(0.1));
}

TEST_CASE("vacancy of two points follows exp(-u cap)") {
  const PointSet K({Point{0, 0, 0}, Point{3, 0, 0}});
  const InterlacementSampler s(Window(K), opts(PathMode::kTrace));
  RngStream rng(4, 0);
  const int n = 6000;
  int both = 0;
  for (int t = 0; t < n; ++t) both += s.sample(0.8, rng).count_at_level(0.8) == 0;
  const double p = std::exp(-0.8 * capacity(K));
  CHECK(std::abs(static_cast<double>(both) / n - p) < 4 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("same stream gives the same sample") {
  const InterlacementSampler s(Window::box(ball(3, 1)), opts(PathMode::kTrace));
  RngStream a(11, 3), b(11, 3);
  const auto x = s.sample(2.0, a), y = s.sample(2.0, b);
  CHECK(x.first_label == y.first_label);
  CHECK(x.occupation == y.occupation);
}

TEST_CASE("occupancy csv") {
  const InterlacementSampler s(Window::box(ball(3, 1)), opts(PathMode::kTrace));
  RngStream rng(5, 0);
  std::ostringstream os;
  write_occupancy_csv(os, s.sample(1.0, rng), 1.0);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "x1,x2,x3,count");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 27);
}
