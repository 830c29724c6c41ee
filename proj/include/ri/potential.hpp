#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ri/lattice.hpp"

namespace ri {

/// Table of G(0, x) for |x|_inf <= radius, d in {3, 4}.
///
/// One coordinate is integrated in closed form; the remaining (d-1)-fold
/// integral is split into pyramids (one per axis holding the largest
/// frequency), pulled back to a cube, and evaluated with tensor Gauss-Legendre
/// rules. The whole table is produced by successive contractions.
class GreenTable {
 public:
  GreenTable(int d, int radius, double tolerance = 1e-8);

  /// Process-wide cache; returns a table with radius >= the request.
  static std::shared_ptr<const GreenTable> shared(int d, int radius);

  int dim() const { return d_; }
  int radius() const { return radius_; }
  int nodes() const { return nodes_; }
  /// Max abs difference between the final rule and the next coarser one.
  double error_estimate() const { return error_; }

  bool covers(const Point& x) const { return linf_norm(x) <= radius_; }
  double at(const Point& x) const;
  double operator()(const Point& x, const Point& y) const { return at(y - x); }
  /// Unchecked lookup on absolute coordinates.
  double at_abs(const std::array<Coord, kMaxDim>& a) const;

 private:
  std::vector<double> compute(int nodes) const;

  int d_;
  int radius_;
  int nodes_ = 0;
  double error_ = 0.0;
  std::vector<std::size_t> stride_;
  std::vector<double> table_;
};

struct EquilibriumMeasure {
  std::vector<Point> support;    // points of the inner boundary
  std::vector<double> weights;   // e_K on support
  double capacity = 0.0;
  double condition_estimate = 1.0;
  double max_residual = 0.0;     // max_x |sum_y G(x,y) e(y) - 1| over K
};

struct PotentialOptions {
  std::size_t max_points = 5000;
  double max_condition = 1e12;
};

struct IllConditioned : std::runtime_error {
  double condition;
  IllConditioned(const std::string& msg, double cond) : std::runtime_error(msg), condition(cond) {}
};

/// Radius a Green table must reach to cover all differences within K.
int required_green_radius(const PointSet& K);

EquilibriumMeasure equilibrium_measure(const PointSet& K, const GreenTable& g,
                                       const PotentialOptions& opt = {});
EquilibriumMeasure equilibrium_measure(const PointSet& K, const PotentialOptions& opt = {});

/// Equilibrium measure of B(center, r) using hyperoctahedral symmetry of the
/// box; only orbit representatives enter the linear system.
EquilibriumMeasure box_equilibrium_measure(const Box& b, const GreenTable& g);
EquilibriumMeasure box_equilibrium_measure(const Box& b);

double capacity(const PointSet& K);
double vacancy_probability(const PointSet& K, double u);

struct CapacityRow {
  std::string set_id;
  std::size_t n_points = 0;
  double capacity = 0.0;
  double condition_estimate = 0.0;
};
void write_capacity_csv(std::ostream& os, const std::vector<CapacityRow>& rows);

}  // namespace ri
