#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "ri/lattice.hpp"
#include "ri/potential.hpp"
#include "ri/rng.hpp"
#include "ri/walk.hpp"

namespace ri {

/// Finite observation window with a dense site index.
class Window {
 public:
  explicit Window(PointSet sites);
  static Window box(const Box& b);

  const PointSet& sites() const { return sites_; }
  const Region& region() const { return region_; }
  std::size_t size() const { return sites_.size(); }
  int dim() const { return sites_.dim(); }
  bool is_box() const { return box_.has_value(); }
  const Box& as_box() const;
  /// Smallest r with the window inside B(0, r).
  Coord radius() const { return radius_; }
  /// Site index of p, or -1 when p is outside the window.
  std::int64_t index_of(const Point& p) const {
    if (!idx_.contains(p)) return -1;
    return map_[idx_.index(p)];
  }

 private:
  PointSet sites_;
  Region region_;
  CuboidIndex idx_;
  std::vector<std::int32_t> map_;
  std::optional<Box> box_;
  Coord radius_ = 0;
};

enum class PathMode {
  kFull,   // forward/backward paths stored (truncated at the exit of B(0,R))
  kTrace,  // only the time-ordered window visits are stored
};

struct SamplerOptions {
  Coord truncation_radius = 0;  // 0 selects max(50, 20 * window radius)
  PathMode mode = PathMode::kFull;
  /// Trace mode: after each exit of B(0,R) decide with the exact Green
  /// function whether and where the walk re-enters the window.
  bool exact_return = true;
  std::uint64_t max_attempts = 1'000'000;
  std::size_t max_exact_boundary = 2000;
  int max_green_radius = 128;
};

struct LabeledTrajectory {
  double label = 0.0;
  Point anchor;
  std::vector<Point> fwd;  // fwd[0] == anchor (full mode)
  std::vector<Point> bwd;  // bwd[0] == anchor (full mode)
  /// Window-site indices in time order over the two-sided path, anchor once.
  std::vector<std::uint32_t> visits;
  std::uint64_t backward_attempts = 0;

  /// reverse(bwd) followed by fwd[1:], i.e. the two-sided path in time order.
  std::vector<Point> two_sided() const;
};

inline constexpr double kNeverVisited = std::numeric_limits<double>::infinity();

class InterlacementSample {
 public:
  std::shared_ptr<const Window> window;
  double u_max = 0.0;
  Coord R = 0;
  PathMode mode = PathMode::kFull;
  bool exact_return = false;
  double capacity = 0.0;
  double bias_bound = 0.0;  // 0 when returns are resolved exactly
  std::vector<LabeledTrajectory> trajectories;  // ascending labels
  std::vector<std::uint32_t> occupation;        // total visits per window site
  std::vector<double> first_label;              // smallest label visiting each site

  std::size_t count_at_level(double u) const;
  bool vacant(std::size_t site, double u) const { return first_label[site] > u; }
  PointSet vacant_at_level(double u) const;
  PointSet occupied_at_level(double u) const;
  std::vector<std::uint32_t> occupation_at_level(double u) const;

  /// Recomputes occupation and first_label from the trajectories.
  void rebuild_fields();
};

class InterlacementSampler {
 public:
  explicit InterlacementSampler(Window w, SamplerOptions opt = {});
  ~InterlacementSampler();
  InterlacementSampler(InterlacementSampler&&) noexcept;

  InterlacementSample sample(double u_max, RngStream& rng) const;

  const Window& window() const { return *window_; }
  const EquilibriumMeasure& equilibrium() const { return em_; }
  double capacity() const { return em_.capacity; }
  Coord R() const { return R_; }
  bool exact_return() const;
  double bias_bound() const;

 private:
  struct Impl;
  std::shared_ptr<const Window> window_;
  SamplerOptions opt_;
  EquilibriumMeasure em_;
  Coord R_ = 0;
  std::unique_ptr<Impl> impl_;
};

/// Streaming comparison of per-site occupancy of the increment (range of
/// trajectories with labels in (u, v]) against fresh samples at level v - u.
class IncrementLawCheck {
 public:
  explicit IncrementLawCheck(std::size_t n_sites);
  void add_increment(const InterlacementSample& s, double u, double v);
  void add_fresh(const InterlacementSample& s, double level);

  struct Report {
    std::vector<double> p_increment, p_fresh, z;
    double max_abs_z = 0.0;
    std::uint64_t n_increment = 0, n_fresh = 0;
    /// Increment: P(a and b occupied) vs P(a)P(b) for the first/last site.
    double pair_joint = 0.0, pair_product = 0.0, pair_z = 0.0;
  };
  Report report() const;

 private:
  std::vector<std::uint64_t> inc_, fresh_;
  std::uint64_t n_inc_ = 0, n_fresh_ = 0, joint_ = 0;
};

void write_sample_ndjson(std::ostream& os, const InterlacementSample& s);
void write_occupancy_csv(std::ostream& os, const InterlacementSample& s, double u);

}  // namespace ri
