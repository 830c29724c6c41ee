#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ri/interlacement.hpp"
#include "ri/lattice.hpp"

namespace ri {

/// Path indices [start, end] of one excursion from A to the outer boundary of U.
/// A pending excursion entered A but the path ended before leaving U; then
/// `end` is the last index and `exit_seen` is false.
struct Excursion {
  std::size_t start = 0, end = 0;
  bool exit_seen = true;
};

/// Successive return/departure times R_k, D_k along `path`.
std::vector<Excursion> decompose_excursions(const std::vector<Point>& path, const PointSet& A, const PointSet& U);

struct ClotheslineRecord {
  Point entry, exit;
  double label = 0;
  std::size_t traj = 0;  // index in the sample
  std::size_t k = 0;     // 1-based excursion index within the trajectory
};

struct Clothesline {
  std::vector<ClotheslineRecord> records;  // ordered by (label, traj, k)
  std::size_t pending = 0;                 // truncated excursions, not recorded

  /// Labelled sequence view: records with label <= u, in order.
  std::vector<ClotheslineRecord> sequence(double u) const;
  /// Unordered multiset view: (entry, exit) pairs with label <= u, sorted.
  std::vector<std::pair<Point, Point>> multiset(double u) const;
};

/// Excursions of every trajectory of a full-mode sample. A must lie inside
/// the sample window, otherwise trajectories missing the window are lost.
Clothesline build_clothesline(const InterlacementSample& s, const PointSet& A, const PointSet& U);

bool clothesline_less(const ClotheslineRecord& a, const ClotheslineRecord& b);

/// One clothesline pair seen from the inner set B: the sub-path from the first
/// B-visit to the last A-visit before leaving U, or the cemetery when the
/// excursion misses B.
struct InnerRecord {
  std::size_t traj = 0, k = 0;
  double label = 0;
  bool cemetery = true;
  std::vector<Point> path;
};

struct InnerView {
  std::vector<InnerRecord> records;  // clothesline order, labels <= u
  std::size_t pending = 0;
  /// Union of the ranges, intersected with B.
  PointSet range_in_B;
};

InnerView restrict_to_inner(const InterlacementSample& s, const PointSet& B, const PointSet& A, const PointSet& U,
                            double u);

/// I^u ∩ B read from the sample's occupation field.
PointSet occupied_in(const InterlacementSample& s, const PointSet& B, double u);

/// Rounded boxes around B_r: A is the union of Euclidean balls B^2(x, s) over
/// x in B_{r+s}, U the same over B_{r+2s}; s = r^exponent.
struct RoundedBoxes {
  double b = 0, s = 0;
  PointSet A, U;
};
/// b = (1 + (4d - 4) / (3d - 2)) / 2.
double rounded_box_b(int d);
/// exponent <= 0 selects 1 / rounded_box_b(d).
RoundedBoxes rounded_boxes(int d, Coord r, double exponent = 0);

// ---- finite-energy events ----

struct FiniteEnergyLevels {
  double u1 = 0, u2 = 0, u3 = 0, delta1 = 0, delta2 = 0;
  /// (u, u, u, delta / 2, delta).
  static FiniteEnergyLevels standard(double u, double delta) { return {u, u, u, delta / 2, delta}; }
};

struct FiniteEnergyResult {
  bool f1 = false, f2 = false, f3 = false;
  bool all() const { return f1 && f2 && f3; }
};

struct WindowTooSmall : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Outer annulus B(x, r + 5 r0) \ B(x, r + 3 r0).
PointSet inner_annulus(const Box& B, Coord r0);
/// B(x, r + 6 r0) \ B(x, r + 2 r0).
PointSet outer_annulus(const Box& B, Coord r0);
/// B(x, r + 7 r0).
Box hat_box(const Box& B, Coord r0);

/// Evaluates the three events on one sample. The window must contain
/// B(x, r + 8 r0).
FiniteEnergyResult detect_finite_energy_good(const InterlacementSample& s, const Box& B, Coord r0,
                                             const FiniteEnergyLevels& lv);

void write_clothesline_csv(std::ostream& os, const Clothesline& c, int d);

}  // namespace ri
