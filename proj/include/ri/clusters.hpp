#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ri/interlacement.hpp"
#include "ri/lattice.hpp"

namespace ri {

struct ClusterDecomposition {
  PointSet domain;
  PointSet vacant;
  std::vector<int> component;           // per vacant point (PointSet order)
  std::vector<std::size_t> sizes;       // per component
  std::vector<Coord> diameters;         // l-infinity diameter per component
  std::vector<std::uint8_t> touches_boundary;  // meets the inner boundary of domain
  std::size_t count() const { return sizes.size(); }
};

/// Nearest-neighbour components of `vacant` (which must lie inside domain).
/// Component ids follow the order of each component's smallest point.
ClusterDecomposition decompose(const PointSet& vacant, const PointSet& domain);

/// Coupled vacancy field over a box: site x is vacant at level u iff its
/// first-visit label exceeds u. All levels are thresholds of one field.
class LevelField {
 public:
  LevelField(Box box, std::vector<double> first_label);
  static LevelField from_sample(const InterlacementSample& s);

  const Box& box() const { return box_; }
  const CuboidIndex& index() const { return idx_; }
  int dim() const { return box_.center.d; }
  double first_label(std::size_t k) const { return first_[k]; }
  bool vacant(std::size_t k, double u) const { return first_[k] > u; }
  bool vacant(const Point& p, double u) const { return first_[idx_.index(p)] > u; }
  /// True when B(center, r) fits in the field.
  bool covers(Coord r) const { return r <= box_.radius; }

 private:
  Box box_;
  CuboidIndex idx_;
  std::vector<double> first_;
};

/// V^u inside B_r has a cluster with 5 * diameter >= r.
bool detect_exist(const LevelField& f, Coord r, double u);
/// Every pair of clusters of V^u in B_r with 10 * diameter >= r is connected
/// in V^v inside B_{2r} (v < u).
bool detect_unique(const LevelField& f, Coord r, double u, double v);
/// B_M connected to the boundary of B_{6M} in V^u, and all V^u clusters of
/// B_{4M} meeting both B_{2M} and the boundary of B_{4M} connected in V^v
/// inside B_{4M}.
bool detect_uc(const LevelField& f, Coord M, double u, double v);
/// No cluster of V^u meets both B_r and the boundary of B_M.
bool detect_disconnect(const LevelField& f, Coord r, Coord M, double u);

struct ClassCounts {
  Coord M = 0;
  int j = 0;
  int imax = 0;                        // floor(sqrt(M))
  std::vector<Coord> v_radius;         // radius of V_k, k = 0..2*imax
  std::size_t n_clusters = 0;          // clusters of V^u in B_{4M} meeting its boundary
  std::vector<std::size_t> U_eta;      // U_i(eta_j), i = 0..imax
  std::vector<std::size_t> U_step;     // U_{i,i+1}(eta_j), i = 0..imax-1
  std::vector<std::size_t> U_half;     // U_{i+1/2,i+1}(eta_j), i = 0..imax-1
  std::vector<std::size_t> U_diag;     // U_i = U_i(eta_i), i = 0..imax
  /// Merged family for stage j (empty when j == imax): each class as a
  /// sorted list of cluster ids.
  std::vector<std::vector<std::size_t>> tilde;
};

/// Radius of V_k = B_{4M - k sqrt(M)} (rounded down).
Coord class_box_radius(Coord M, int k);
/// Class statistics of the partially sprinkled configuration eta_j (level u
/// inside V_{2j}, level u - delta outside). eta-connectivity is evaluated
/// inside the field box.
ClassCounts class_counts(const LevelField& f, Coord M, int j, double u, double delta);

/// floor(exp((log r)^gamma)); sets *overflow when the value exceeds 2^62.
Coord m_of_r(double r, double gamma, bool* overflow = nullptr);

}  // namespace ri
