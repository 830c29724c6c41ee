#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "doctest.h"
#include "ri/potential.hpp"

using namespace ri;

TEST_CASE("Green function at the origin (Watson's integral)") {
  const auto g3 = GreenTable::shared(3, 4);
  CHECK(g3->at(Point{0, 0, 0}) == doctest::Approx(1.516386059151978).epsilon(1e-9));
  const auto g4 = GreenTable::shared(4, 2);
  CHECK(g4->at(Point{0, 0, 0, 0}) == doctest::Approx(1.2394671218).epsilon(1e-7));
}

TEST_CASE("Green function symmetry and decay") {
  const auto g = GreenTable::shared(3, 20);
  CHECK(g->at(Point{1, 2, 3}) == doctest::Approx(g->at(Point{-3, 1, -2})).epsilon(1e-12));
  // G(x) ~ 3 / (2 pi |x|) in d = 3.
  const double far = g->at(Point{20, 0, 0});
  CHECK(far == doctest::Approx(3.0 / (2 * std::numbers::pi * 20)).epsilon(2e-3));
  // Harmonic off the origin: G(x) equals the neighbour average.
  const Point x{2, 1, 0};
  double avg = 0;
  for (const auto& y : neighbors(x, false)) avg += g->at(y) / 6;
  CHECK(avg == doctest::Approx(g->at(x)).epsilon(1e-9));
  // At the origin the average is G(0) - 1.
  double avg0 = 0;
  for (const auto& y : neighbors(Point{0, 0, 0}, false)) avg0 += g->at(y) / 6;
  CHECK(avg0 == doctest::Approx(g->at(Point{0, 0, 0}) - 1).epsilon(1e-9));
}

TEST_CASE("capacity of a point") {
  CHECK(capacity(PointSet({Point{0, 0, 0}})) == doctest::Approx(1 / 1.516386059151978).epsilon(1e-9));
  CHECK(vacancy_probability(PointSet({Point{0, 0, 0}}), 2.0) ==
        doctest::Approx(std::exp(-2 / 1.516386059151978)).epsilon(1e-9));
}

TEST_CASE("equilibrium measure of B_1 against a dense solve") {
  const PointSet K = PointSet::from_box(ball(3, 1));
  const auto g = GreenTable::shared(3, 4);
  const auto n = static_cast<Eigen::Index>(K.size());
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) G(i, j) = (*g)(K[static_cast<std::size_t>(i)], K[static_cast<std::size_t>(j)]);
  const Eigen::VectorXd e = G.partialPivLu().solve(Eigen::VectorXd::Ones(n));
  const EquilibriumMeasure em = equilibrium_measure(K);
  CHECK(em.capacity == doctest::Approx(e.sum()).epsilon(1e-9));
  for (std::size_t k = 0; k < em.support.size(); ++k) {
    const auto i = K.index_of(em.support[k]);
    REQUIRE(i >= 0);
    CHECK(em.weights[k] == doctest::Approx(e(i)).epsilon(1e-8));
    CHECK(em.weights[k] > 0);
    CHECK(em.weights[k] < 1);
  }
  // The centre is not on the boundary and carries no mass.
  CHECK(std::abs(e(K.index_of(Point{0, 0, 0}))) < 1e-9);
  const EquilibriumMeasure sym = box_equilibrium_measure(ball(3, 1));
  CHECK(sym.capacity == doctest::Approx(em.capacity).epsilon(1e-10));
}

TEST_CASE("capacity is monotone and subadditive") {
  const double c1 = capacity(PointSet::from_box(ball(3, 1)));
  const double c2 = capacity(PointSet::from_box(ball(3, 2)));
  CHECK(c2 > c1);
  const PointSet two({Point{0, 0, 0}, Point{5, 0, 0}});
  CHECK(capacity(two) < 2 * capacity(PointSet({Point{0, 0, 0}})));
  CHECK(capacity(two) > capacity(PointSet({Point{0, 0, 0}})));
}
