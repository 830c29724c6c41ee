#pragma once

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/random/discrete_distribution.hpp>

#include "ri/lattice.hpp"
#include "ri/rng.hpp"

namespace ri {

struct WalkPath {
  std::vector<Point> sites;
};

enum class StopTag { kExited, kHit, kBudget };
std::string to_string(StopTag t);

/// Membership oracle used by walkers: a cuboid, or an arbitrary finite set
/// (bitmap over its bounding box, binary search when the box is huge).
class Region {
 public:
  Region() = default;
  static Region of_cuboid(const Cuboid& c);
  static Region of_box(const Box& b) { return of_cuboid(b.cuboid()); }
  static Region of_set(const PointSet& s);

  bool contains(const Point& p) const {
    if (!bbox_.contains(p)) return false;
    if (full_) return true;
    if (!mask_.empty()) return mask_[idx_.index(p)] != 0;
    return set_->contains(p);
  }
  const Cuboid& bbox() const { return bbox_; }
  bool is_cuboid() const { return full_; }
  int dim() const { return bbox_.lo.d; }
  /// l-infinity distance from p to the bounding box (0 inside).
  Coord bbox_distance(const Point& p) const;

 private:
  Cuboid bbox_;
  bool full_ = false;
  CuboidIndex idx_;
  std::vector<std::uint8_t> mask_;
  std::shared_ptr<const PointSet> set_;
};

struct StopRule {
  enum class Kind { kExit, kHit, kReturn };
  Kind kind = Kind::kExit;
  Region region;
  std::uint64_t budget = 100'000'000;

  /// First time outside the region.
  static StopRule exit(Region r, std::uint64_t budget = 100'000'000) { return {Kind::kExit, std::move(r), budget}; }
  /// First time n >= 0 inside the region.
  static StopRule hit(Region r, std::uint64_t budget = 100'000'000) { return {Kind::kHit, std::move(r), budget}; }
  /// First time n >= 1 inside the region.
  static StopRule return_to(Region r, std::uint64_t budget = 100'000'000) { return {Kind::kReturn, std::move(r), budget}; }
};

struct WalkResult {
  WalkPath path;
  StopTag tag = StopTag::kBudget;
};

inline void random_step(Point& x, RngStream& rng) {
  std::uint32_t k = rng.below(static_cast<std::uint32_t>(2 * x.d));
  x.x[k >> 1] += (k & 1u) ? 1 : -1;
}

/// Simple random walk from start until the rule fires or the budget of steps
/// runs out (tag kBudget; the path is returned as walked).
WalkResult walk_until(const Point& start, const StopRule& rule, RngStream& rng);

/// max(50, 20 * window_radius).
Coord default_truncation_radius(Coord window_radius);
/// cap / R^(d-2): order-of-magnitude return bound with unit constant.
double truncation_bias_bound(double cap, Coord R, int d);
/// Smallest r with K inside B(0, r).
Coord centered_radius(const PointSet& K);

struct EscapeEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  double bias_bound = 0.0;  // NaN when cap(K) is not computable
  std::uint64_t n_samples = 0;
  Coord R = 0;
};

/// Fraction of walks from x that leave B(0, R) before returning to K.
EscapeEstimate escape_probability_mc(const Point& x, const PointSet& K, Coord R, std::uint64_t n_samples,
                                     RngStream& rng);

struct RejectionFailure : std::runtime_error {
  std::uint64_t attempts;
  RejectionFailure(const std::string& msg, std::uint64_t a) : std::runtime_error(msg), attempts(a) {}
};

struct NoReturnWalk {
  WalkPath path;
  std::uint64_t attempts = 0;
};

/// Rejection sampler: walks from x until they re-enter K (rejected) or leave
/// B(0, R) (accepted, path includes the exit site).
NoReturnWalk sample_no_return_walk(const Point& x, const PointSet& K, Coord R, RngStream& rng,
                                   std::uint64_t max_attempts = 1'000'000);
NoReturnWalk sample_no_return_walk(const Point& x, const Region& K, Coord R, RngStream& rng,
                                   std::uint64_t max_attempts = 1'000'000);

/// Exit distribution of the walk started at the centre of B(0, rho) on the
/// outer boundary of the box, from the spectral expansion of the killed
/// Green function.
class ExitKernel {
 public:
  ExitKernel(int d, int rho);
  static const ExitKernel& get(int d, int rho);
  /// Largest supported rho (a power of two) for dimension d.
  static int max_radius(int d);

  int rho() const { return rho_; }
  const std::vector<Point>& sites() const { return sites_; }
  const std::vector<double>& probabilities() const { return probs_; }
  Point sample(RngStream& rng) const { return sites_[dist_(rng)]; }

  /// Kernels for rho = 1, 2, 4, ..., max_radius(d); built once per d.
  static const std::vector<const ExitKernel*>& ladder(int d);

 private:
  int d_, rho_;
  std::vector<Point> sites_;
  std::vector<double> probs_;
  boost::random::discrete_distribution<std::uint32_t, double> dist_;
};

/// Moves x until it leaves B(0, R). Whenever x lies in `window`, visit(x) is
/// called; returning false stops the walk (the function then returns false).
/// Away from the window's bounding box the walk jumps to the exit site of the
/// largest cube around x that avoids the window and stays inside B(0, R), so
/// window visits, their order, and the exit site have the exact law of the
/// simple random walk while the skipped sites are not reported.
template <class Visit>
bool accelerated_walk(Point& x, const Region& window, Coord R, RngStream& rng, Visit&& visit) {
  const auto& ladder = ExitKernel::ladder(x.d);
  const Coord max_rho = ladder.back()->rho();
  while (true) {
    const Coord m = linf_norm(x);
    if (m > R) return true;
    if (window.contains(x) && !visit(x)) return false;
    Coord lim = std::min(window.bbox_distance(x) - 1, R - m);
    if (lim >= 1) {
      lim = std::min(lim, max_rho);
      std::size_t k = 0;
      while (k + 1 < ladder.size() && ladder[k + 1]->rho() <= lim) ++k;
      x = x + ladder[k]->sample(rng);
    } else {
      random_step(x, rng);
    }
  }
}

void write_walk_ndjson(std::ostream& os, const WalkResult& w);

}  // namespace ri
