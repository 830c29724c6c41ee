#include "ri/interlacement.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Dense>
#include <boost/random/discrete_distribution.hpp>

#include "json.hpp"

namespace ri {

// ---- Window ----

Window::Window(PointSet sites) : sites_(std::move(sites)) {
  if (sites_.empty()) throw std::invalid_argument("Window: empty site set");
  region_ = Region::of_set(sites_);
  const Cuboid bb = sites_.bbox();
  if (bb.size() > (std::uint64_t{1} << 26)) throw std::invalid_argument("Window: bounding box too large");
  idx_ = CuboidIndex(bb);
  map_.assign(idx_.size(), -1);
  for (std::size_t i = 0; i < sites_.size(); ++i) map_[idx_.index(sites_[i])] = static_cast<std::int32_t>(i);
  radius_ = centered_radius(sites_);
  if (sites_.size() == bb.size()) {
    bool cube = true;
    Coord side = bb.hi.x[0] - bb.lo.x[0];
    for (int i = 1; i < bb.lo.d; ++i) cube = cube && (bb.hi.x[i] - bb.lo.x[i] == side);
    if (cube && side % 2 == 0) {
      Point c = bb.lo;
      for (int i = 0; i < c.d; ++i) c.x[i] += side / 2;
      box_ = Box(c, side / 2);
    }
  }
}

Window Window::box(const Box& b) { return Window(PointSet::from_box(b)); }

const Box& Window::as_box() const {
  if (!box_) throw std::logic_error("Window is not a box");
  return *box_;
}

// ---- trajectories / samples ----

std::vector<Point> LabeledTrajectory::two_sided() const {
  std::vector<Point> out(bwd.rbegin(), bwd.rend());
  if (out.empty()) out.push_back(anchor);
  if (!fwd.empty()) out.insert(out.end(), fwd.begin() + 1, fwd.end());
  return out;
}

std::size_t InterlacementSample::count_at_level(double u) const {
  return static_cast<std::size_t>(
      std::upper_bound(trajectories.begin(), trajectories.end(), u,
                       [](double x, const LabeledTrajectory& t) { return x < t.label; }) -
      trajectories.begin());
}

static void check_level(double u, double u_max) {
  if (!(u > 0.0) || u > u_max) throw std::out_of_range("level " + std::to_string(u) + " outside (0, u_max]");
}

PointSet InterlacementSample::vacant_at_level(double u) const {
  check_level(u, u_max);
  std::vector<Point> out;
  for (std::size_t i = 0; i < first_label.size(); ++i)
    if (first_label[i] > u) out.push_back(window->sites()[i]);
  return PointSet(std::move(out));
}

PointSet InterlacementSample::occupied_at_level(double u) const {
  check_level(u, u_max);
  std::vector<Point> out;
  for (std::size_t i = 0; i < first_label.size(); ++i)
    if (first_label[i] <= u) out.push_back(window->sites()[i]);
  return PointSet(std::move(out));
}

std::vector<std::uint32_t> InterlacementSample::occupation_at_level(double u) const {
  std::vector<std::uint32_t> occ(window->size(), 0);
  for (const auto& t : trajectories) {
    if (t.label > u) break;
    for (auto s : t.visits) ++occ[s];
  }
  return occ;
}

void InterlacementSample::rebuild_fields() {
  std::sort(trajectories.begin(), trajectories.end(),
            [](const LabeledTrajectory& a, const LabeledTrajectory& b) { return a.label < b.label; });
  occupation.assign(window->size(), 0);
  first_label.assign(window->size(), kNeverVisited);
  for (const auto& t : trajectories) {
    for (auto s : t.visits) {
      ++occupation[s];
      if (first_label[s] == kNeverVisited) first_label[s] = t.label;
    }
  }
}

// ---- sampler ----

struct InterlacementSampler::Impl {
  boost::random::discrete_distribution<std::uint32_t, double> anchor_dist;
  bool exact = false;
  std::shared_ptr<const GreenTable> green;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  Eigen::VectorXd weights;

  double return_probability(const Point& x, const std::vector<Point>& support, Eigen::VectorXd& g) const {
    const auto n = static_cast<Eigen::Index>(support.size());
    g.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) g(j) = green->at(support[static_cast<std::size_t>(j)] - x);
    return std::clamp(g.dot(weights), 0.0, 1.0);
  }
};

InterlacementSampler::InterlacementSampler(Window w, SamplerOptions opt)
    : window_(std::make_shared<const Window>(std::move(w))), opt_(opt), impl_(std::make_unique<Impl>()) {
  const Window& W = *window_;
  if (W.dim() > 4) throw DimensionError("InterlacementSampler: exact equilibrium measure needs d <= 4");
  em_ = W.is_box() ? box_equilibrium_measure(W.as_box()) : equilibrium_measure(W.sites());
  R_ = opt_.truncation_radius > 0 ? opt_.truncation_radius : default_truncation_radius(W.radius());
  if (R_ <= W.radius()) throw std::invalid_argument("InterlacementSampler: truncation radius must exceed window radius");
  impl_->anchor_dist =
      boost::random::discrete_distribution<std::uint32_t, double>(em_.weights.begin(), em_.weights.end());

  const int needed = static_cast<int>(R_ + 1 + W.radius());
  if (opt_.mode == PathMode::kTrace && opt_.exact_return && em_.support.size() <= opt_.max_exact_boundary &&
      needed <= opt_.max_green_radius) {
    impl_->exact = true;
    impl_->green = GreenTable::shared(W.dim(), needed);
    const auto n = static_cast<Eigen::Index>(em_.support.size());
    Eigen::MatrixXd M(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        M(i, j) = impl_->green->at(em_.support[static_cast<std::size_t>(j)] - em_.support[static_cast<std::size_t>(i)]);
    impl_->lu.compute(M);
    impl_->weights = Eigen::Map<const Eigen::VectorXd>(em_.weights.data(), n);
  }
}

InterlacementSampler::~InterlacementSampler() = default;
InterlacementSampler::InterlacementSampler(InterlacementSampler&&) noexcept = default;

bool InterlacementSampler::exact_return() const { return impl_->exact; }

double InterlacementSampler::bias_bound() const {
  return impl_->exact ? 0.0 : truncation_bias_bound(em_.capacity, R_, window_->dim());
}

InterlacementSample InterlacementSampler::sample(double u_max, RngStream& rng) const {
  if (!(u_max >= 0.0) || !std::isfinite(u_max)) throw std::invalid_argument("sample: u_max must be finite and >= 0");
  const Window& W = *window_;
  const Region& reg = W.region();
  InterlacementSample s;
  s.window = window_;
  s.u_max = u_max;
  s.R = R_;
  s.mode = opt_.mode;
  s.exact_return = impl_->exact;
  s.capacity = em_.capacity;
  s.bias_bound = bias_bound();

  const std::uint64_t N = rng.poisson(u_max * em_.capacity);
  s.trajectories.resize(N);
  Eigen::VectorXd g;
  for (std::uint64_t i = 0; i < N; ++i) {
    LabeledTrajectory& t = s.trajectories[i];
    t.label = u_max * rng.uniform_pos();
    t.anchor = em_.support[impl_->anchor_dist(rng)];
    const auto anchor_idx = static_cast<std::uint32_t>(W.index_of(t.anchor));
    try {
      if (opt_.mode == PathMode::kFull) {
        WalkResult f = walk_until(t.anchor, StopRule::exit(Region::of_box(ball(W.dim(), R_))), rng);
        t.fwd = std::move(f.path.sites);
        NoReturnWalk b = sample_no_return_walk(t.anchor, reg, R_, rng, opt_.max_attempts);
        t.bwd = std::move(b.path.sites);
        t.backward_attempts = b.attempts;
        for (const auto& p : t.fwd) {
          auto k = W.index_of(p);
          if (k >= 0) t.visits.push_back(static_cast<std::uint32_t>(k));
        }
      } else {
        t.visits.push_back(anchor_idx);
        Point x = t.anchor;
        bool skip = true;
        while (true) {
          accelerated_walk(x, reg, R_, rng, [&](const Point& p) {
            if (skip) {
              skip = false;
              return true;
            }
            t.visits.push_back(static_cast<std::uint32_t>(W.index_of(p)));
            return true;
          });
          if (!impl_->exact) break;
          const double h = impl_->return_probability(x, em_.support, g);
          if (rng.uniform() >= h) break;
          Eigen::VectorXd H = impl_->lu.solve(g);
          double tot = 0.0;
          for (Eigen::Index j = 0; j < H.size(); ++j) tot += std::max(H(j), 0.0);
          double target = rng.uniform() * tot, acc = 0.0;
          Eigen::Index pick = H.size() - 1;
          for (Eigen::Index j = 0; j < H.size(); ++j) {
            acc += std::max(H(j), 0.0);
            if (target < acc) {
              pick = j;
              break;
            }
          }
          x = em_.support[static_cast<std::size_t>(pick)];
          skip = false;
        }
        std::uint64_t a = 1;
        for (;; ++a) {
          if (a > opt_.max_attempts)
            throw RejectionFailure("backward walk rejection cap exceeded at " + t.anchor.str(), opt_.max_attempts);
          Point y = t.anchor;
          random_step(y, rng);
          bool escaped = accelerated_walk(y, reg, R_, rng, [](const Point&) { return false; });
          if (!escaped) continue;
          if (impl_->exact && rng.uniform() < impl_->return_probability(y, em_.support, g)) continue;
          break;
        }
        t.backward_attempts = a;
      }
    } catch (const RejectionFailure& e) {
      throw RejectionFailure(std::string(e.what()) + " (trajectory " + std::to_string(i) + ")", e.attempts);
    }
  }
  s.rebuild_fields();
  return s;
}

// ---- increment law ----

IncrementLawCheck::IncrementLawCheck(std::size_t n_sites) : inc_(n_sites, 0), fresh_(n_sites, 0) {}

void IncrementLawCheck::add_increment(const InterlacementSample& s, double u, double v) {
  if (!(u <= v)) throw std::invalid_argument("increment law check needs u <= v");
  std::vector<std::uint8_t> hit(inc_.size(), 0);
  for (const auto& t : s.trajectories) {
    if (t.label <= u) continue;
    if (t.label > v) break;
    for (auto k : t.visits) hit[k] = 1;
  }
  for (std::size_t k = 0; k < hit.size(); ++k) inc_[k] += hit[k];
  if (!hit.empty() && hit.front() && hit.back()) ++joint_;
  ++n_inc_;
}

void IncrementLawCheck::add_fresh(const InterlacementSample& s, double level) {
  for (std::size_t k = 0; k < fresh_.size(); ++k) fresh_[k] += s.first_label[k] <= level ? 1 : 0;
  ++n_fresh_;
}

IncrementLawCheck::Report IncrementLawCheck::report() const {
  Report r;
  r.n_increment = n_inc_;
  r.n_fresh = n_fresh_;
  const double n1 = static_cast<double>(n_inc_), n2 = static_cast<double>(n_fresh_);
  for (std::size_t k = 0; k < inc_.size(); ++k) {
    double p1 = n1 > 0 ? inc_[k] / n1 : 0.0;
    double p2 = n2 > 0 ? fresh_[k] / n2 : 0.0;
    double pool = (n1 + n2) > 0 ? (inc_[k] + fresh_[k]) / (n1 + n2) : 0.0;
    double se = (n1 > 0 && n2 > 0) ? std::sqrt(pool * (1 - pool) * (1 / n1 + 1 / n2)) : 0.0;
    double z = se > 0 ? (p1 - p2) / se : 0.0;
    r.p_increment.push_back(p1);
    r.p_fresh.push_back(p2);
    r.z.push_back(z);
    r.max_abs_z = std::max(r.max_abs_z, std::abs(z));
  }
  if (n1 > 0 && !inc_.empty()) {
    double pa = inc_.front() / n1, pb = inc_.back() / n1;
    r.pair_joint = joint_ / n1;
    r.pair_product = pa * pb;
    double se = std::sqrt(r.pair_product * (1 - r.pair_product) / n1);
    r.pair_z = se > 0 ? (r.pair_joint - r.pair_product) / se : 0.0;
  }
  return r;
}

// ---- output ----

void write_sample_ndjson(std::ostream& os, const InterlacementSample& s) {
  auto pts = [](const std::vector<Point>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : v) a.push_back(p.to_vector());
    return a;
  };
  for (const auto& t : s.trajectories) {
    nlohmann::json j;
    j["label"] = t.label;
    j["anchor"] = t.anchor.to_vector();
    j["fwd"] = pts(t.fwd);
    j["bwd"] = pts(t.bwd);
    if (s.mode == PathMode::kTrace) {
      std::vector<Point> v;
      for (auto k : t.visits) v.push_back(s.window->sites()[k]);
      j["visits"] = pts(v);
    }
    os << j.dump() << '\n';
  }
}

void write_occupancy_csv(std::ostream& os, const InterlacementSample& s, double u) {
  const int d = s.window->dim();
  for (int i = 0; i < d; ++i) os << 'x' << (i + 1) << ',';
  os << "count\n";
  auto occ = s.occupation_at_level(u);
  for (std::size_t k = 0; k < occ.size(); ++k) {
    const Point& p = s.window->sites()[k];
    for (int i = 0; i < d; ++i) os << p.x[i] << ',';
    os << occ[k] << '\n';
  }
}

}  // namespace ri
