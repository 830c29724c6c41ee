#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ri/lattice.hpp"

namespace ri {

struct BridgeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Finite union of cuboids; used for the endpoint sets of a bridge (point
/// clusters or tube faces).
struct CuboidUnion {
  std::vector<Cuboid> parts;
  static CuboidUnion of_points(const PointSet& s);
  static CuboidUnion of_cuboid(const Cuboid& c) { return CuboidUnion{{c}}; }
  bool empty() const { return parts.empty(); }
};

// ---- coarse paths ----

/// Closed continuum cuboid [corner, corner + length e_axis + width (1 - e_axis)]
/// with integer corner; a lattice tube T^j_{L,N}(z) has width 2L and length N + 2L.
struct TubeFrame {
  int d = 0;
  int axis = 0;
  std::array<Coord, kMaxDim> corner{};
  Coord width = 0, length = 0;

  static TubeFrame of(const Tube& T);
  /// Global axis of local coordinate k (local 0 is the tube axis).
  int global_axis(int k) const;
  Cuboid cuboid() const;
  double half_width() const { return 0.5 * static_cast<double>(width); }
};

/// Dyadic box of level n in frame-local coordinates, relative to the frame
/// corner: [a W 2^{-n-1}, (a+1) W 2^{-n-1}) per axis (local axis first).
struct DyadicBox {
  int level = 0;
  std::array<std::int64_t, kMaxDim> index{};
  friend bool operator==(const DyadicBox&, const DyadicBox&) = default;
};

struct CoarsePath {
  TubeFrame frame;
  int depth = 0;
  std::vector<DyadicBox> boxes;   // gamma(1..l), all inside the frame
  DyadicBox start_box, end_box;   // same-level neighbours of the ends containing y_C and y_D
  Point y_C, y_D;
  std::vector<std::vector<DyadicBox>> rounds;  // gamma_0 .. gamma_depth, when recorded

  /// Scaled integer coordinates: one unit is 2^{-(depth+1)} lattice units.
  std::int64_t scale() const { return std::int64_t{2} << depth; }
  std::int64_t side(const DyadicBox& b) const { return frame.width << (depth - b.level); }
  std::int64_t lo(const DyadicBox& b, int k) const { return b.index[k] * side(b); }
  /// Continuum centre in global coordinates, and half-side.
  std::array<double, kMaxDim> center(const DyadicBox& b) const;
  double half_side(const DyadicBox& b) const;
};

/// Refinement depth used by coarse_path: ceil(log2(16 L / s)).
int coarse_depth(double L, double s);
/// Simple coarse path through the tube from y_C (left face) to y_D (right face).
CoarsePath coarse_path(const Tube& T, const Point& y_C, const Point& y_D, double s, int depth = -1,
                       bool record_rounds = false);
CoarsePath coarse_path(const TubeFrame& F, const Point& y_C, const Point& y_D, int depth, bool record_rounds = false);
bool dyadic_adjacent(const CoarsePath& p, const DyadicBox& a, const DyadicBox& b);

struct Check {
  bool ok = true;
  std::string message;
  void fail(const std::string& m) {
    if (ok) message = m;
    ok = false;
  }
};

/// Items i)-iv) of the existence lemma for the final path.
Check check_coarse_path(const CoarsePath& p, double s);
/// Per-round invariants of the refinement for gamma_k.
Check check_coarse_round(const CoarsePath& p, int k);

// ---- one-dimensional bridge ----

using Interval = std::pair<double, double>;

/// Smallest r for which the one-dimensional construction closes: r >= 3 r^xi.
double interval_floor(double xi);
/// Ordered disjoint sub-intervals of [0, R] with gaps 2 r^xi and lengths in [r^xi, r].
std::vector<Interval> interval_bridge(double R, double r, double xi);
Check check_interval_bridge(const std::vector<Interval>& I, double R, double r, double xi);

// ---- bridges ----

struct BridgeBox {
  Box box;
  std::optional<std::array<Point, 2>> marked;  // non-hole boxes only
};

struct Bridge {
  std::vector<std::vector<BridgeBox>> levels;  // levels[0] coarsest, levels.back() = holes
  double s = 0, s_prime = 0, m = 0, xi = 0;
  Tube tube;

  std::size_t J() const { return levels.size(); }
  std::size_t box_count() const;
  const std::vector<BridgeBox>& holes() const { return levels.back(); }
};

struct BridgeParams {
  double xi = 0.6;
  double m = 0;                // 0 selects default_m(xi)
  bool validate = true;
};

/// Calibrated defaults (see the bridge corpus).
double default_m(double xi);
double default_s_min(double xi);
/// Smallest s accepted by specialized_bridge.
double specialized_floor(double xi);

/// Faces case: C = left face, D = right face; all boxes inside T.
Bridge specialized_bridge(const Tube& T, double s, double xi);
/// Rounds of the recursive interval partition of the faces case.
struct IntervalFamilies {
  std::vector<std::vector<Interval>> levels;  // I_1 .. I_{J-1}
  std::vector<Interval> residual;             // I_J
};
IntervalFamilies specialized_intervals(double L, double N, double s, double xi);

Bridge general_bridge(const PointSet& C, const PointSet& D, const Tube& T, double s, const BridgeParams& p = {});

struct BridgeReport {
  Check b1, b2, b3, b4, containment;
  std::size_t boxes = 0, J = 0;
  double box_bound = 0, J_bound = 0;
  bool ok() const { return b1.ok && b2.ok && b3.ok && b4.ok && containment.ok; }
  std::string summary() const;
};

BridgeReport validate_bridge(const Bridge& b, const CuboidUnion& C, const CuboidUnion& D);
BridgeReport validate_bridge(const Bridge& b, const PointSet& C, const PointSet& D);

// ---- dense sub-families ----

struct DenseResult {
  std::vector<std::int64_t> subset;
  std::size_t target = 0;       // ceil(beta * Gamma)
  std::size_t longest_run = 0;  // longest run of indices with gaps <= Gamma
  double regime_bound = 0;      // (|K| - K/Gamma) / (1 + K/Gamma)
};

/// Subset of `indices` (within [1, K]) of size ceil(beta * Gamma) whose
/// consecutive gaps are at most Gamma, taken from a longest admissible run.
/// Throws std::invalid_argument when |indices| < beta K or no run is long enough.
DenseResult dense_subfamily(std::vector<std::int64_t> indices, std::int64_t K, double beta, std::int64_t Gamma);

void write_bridge_json(std::ostream& os, const Bridge& b);
/// 2-D slice through the plane x[axis] = value, as SVG.
void write_bridge_svg(std::ostream& os, const Bridge& b, int axis, Coord value);

}  // namespace ri
