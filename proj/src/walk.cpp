#include "ri/walk.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>

#include "json.hpp"
#include "ri/potential.hpp"

namespace ri {

std::string to_string(StopTag t) {
  switch (t) {
    case StopTag::kExited: return "exited";
    case StopTag::kHit: return "hit";
    case StopTag::kBudget: return "budget";
  }
  return "?";
}

// ---- Region ----

Region Region::of_cuboid(const Cuboid& c) {
  Region r;
  r.bbox_ = c;
  r.full_ = true;
  return r;
}

Region Region::of_set(const PointSet& s) {
  Region r;
  if (s.empty()) {
    // Empty region: an inverted cuboid contains nothing.
    r.bbox_.lo = Point(3);
    r.bbox_.hi = Point(3);
    r.bbox_.lo.x[0] = 1;
    r.full_ = true;
    return r;
  }
  r.bbox_ = s.bbox();
  if (s.size() == r.bbox_.size()) {
    r.full_ = true;
    return r;
  }
  if (r.bbox_.size() <= (std::uint64_t{1} << 26)) {
    r.idx_ = CuboidIndex(r.bbox_);
    r.mask_.assign(r.idx_.size(), 0);
    for (const auto& p : s) r.mask_[r.idx_.index(p)] = 1;
  } else {
    r.set_ = std::make_shared<const PointSet>(s);
  }
  return r;
}

Coord Region::bbox_distance(const Point& p) const {
  Coord m = 0;
  for (int i = 0; i < p.d; ++i) {
    Coord g = std::max(bbox_.lo.x[i] - p.x[i], p.x[i] - bbox_.hi.x[i]);
    m = std::max(m, g);
  }
  return m;
}

// ---- walk_until ----

WalkResult walk_until(const Point& start, const StopRule& rule, RngStream& rng) {
  WalkResult out;
  Point x = start;
  out.path.sites.push_back(x);
  using K = StopRule::Kind;
  auto fired = [&](bool at_start) {
    switch (rule.kind) {
      case K::kExit: return !rule.region.contains(x);
      case K::kHit: return rule.region.contains(x);
      case K::kReturn: return !at_start && rule.region.contains(x);
    }
    return false;
  };
  if (fired(true)) {
    out.tag = rule.kind == K::kExit ? StopTag::kExited : StopTag::kHit;
    return out;
  }
  for (std::uint64_t n = 0; n < rule.budget; ++n) {
    random_step(x, rng);
    out.path.sites.push_back(x);
    if (fired(false)) {
      out.tag = rule.kind == K::kExit ? StopTag::kExited : StopTag::kHit;
      return out;
    }
  }
  out.tag = StopTag::kBudget;
  return out;
}

Coord default_truncation_radius(Coord window_radius) { return std::max<Coord>(50, 20 * window_radius); }

double truncation_bias_bound(double cap, Coord R, int d) {
  return cap / std::pow(static_cast<double>(R), static_cast<double>(d - 2));
}

Coord centered_radius(const PointSet& K) {
  Coord r = 0;
  for (const auto& p : K) r = std::max(r, linf_norm(p));
  return r;
}

namespace {

// One attempt: true if the walk from x leaves B(0,R) before returning to K.
bool escapes(Point x, const Region& K, Coord R, RngStream& rng, std::vector<Point>* path) {
  if (path) path->assign(1, x);
  while (true) {
    random_step(x, rng);
    if (path) path->push_back(x);
    if (linf_norm(x) > R) return true;
    if (K.contains(x)) return false;
  }
}

double capacity_or_nan(const PointSet& K) {
  if (K.size() > 5000 || K.dim() > 4) return std::numeric_limits<double>::quiet_NaN();
  try {
    return capacity(K);
  } catch (const std::exception&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

EscapeEstimate escape_probability_mc(const Point& x, const PointSet& K, Coord R, std::uint64_t n_samples,
                                     RngStream& rng) {
  if (!K.contains(x)) throw std::invalid_argument("escape_probability_mc: x must lie in K");
  const Coord rad = centered_radius(K);
  if (R < 2 * rad || R < 1)
    throw std::invalid_argument("escape_probability_mc: truncation radius " + std::to_string(R) +
                                " below 2 * radius(K) = " + std::to_string(2 * rad));
  const Region reg = Region::of_set(K);
  std::uint64_t esc = 0;
  for (std::uint64_t i = 0; i < n_samples; ++i) esc += escapes(x, reg, R, rng, nullptr) ? 1 : 0;
  EscapeEstimate e;
  e.n_samples = n_samples;
  e.R = R;
  if (n_samples > 0) {
    e.estimate = static_cast<double>(esc) / static_cast<double>(n_samples);
    e.stderr_ = std::sqrt(e.estimate * (1.0 - e.estimate) / static_cast<double>(n_samples));
  }
  e.bias_bound = truncation_bias_bound(capacity_or_nan(K), R, x.d);
  return e;
}

NoReturnWalk sample_no_return_walk(const Point& x, const Region& K, Coord R, RngStream& rng,
                                   std::uint64_t max_attempts) {
  if (!K.contains(x)) throw std::invalid_argument("sample_no_return_walk: x must lie in K");
  if (linf_norm(x) > R) throw std::invalid_argument("sample_no_return_walk: x outside B(0,R)");
  NoReturnWalk out;
  for (std::uint64_t a = 1; a <= max_attempts; ++a) {
    if (escapes(x, K, R, rng, &out.path.sites)) {
      out.attempts = a;
      return out;
    }
  }
  throw RejectionFailure("sample_no_return_walk: rejection cap of " + std::to_string(max_attempts) +
                             " attempts exceeded at " + x.str(),
                         max_attempts);
}

NoReturnWalk sample_no_return_walk(const Point& x, const PointSet& K, Coord R, RngStream& rng,
                                   std::uint64_t max_attempts) {
  if (!boundary(K).contains(x)) throw std::invalid_argument("sample_no_return_walk: x must lie in the boundary of K");
  return sample_no_return_walk(x, Region::of_set(K), R, rng, max_attempts);
}

// ---- exit kernels ----

int ExitKernel::max_radius(int d) {
  if (d == 3) return 64;
  if (d == 4) return 32;
  return 8;
}

ExitKernel::ExitKernel(int d, int rho) : d_(d), rho_(rho) {
  check_dim(d);
  if (rho < 1) throw std::invalid_argument("ExitKernel: rho must be >= 1");
  const int n = 2 * rho + 1;
  const double norm = 2.0 / (n + 1);
  const int m = d - 1;  // lateral axes
  std::vector<double> cosk(static_cast<std::size_t>(n + 1)), at0(static_cast<std::size_t>(n + 1)),
      atrho(static_cast<std::size_t>(n + 1));
  for (int k = 1; k <= n; ++k) {
    const double th = k * std::numbers::pi / (n + 1);
    cosk[k] = std::cos(th);
    at0[k] = std::sin(k * std::numbers::pi * (rho + 1) / (n + 1));
    atrho[k] = std::sin(k * std::numbers::pi * (2 * rho + 1) / (n + 1));
  }
  std::size_t lat = 1;
  for (int i = 0; i < m; ++i) lat *= static_cast<std::size_t>(n);

  // A(k') = sum_{k1} phi_k1(0) phi_k1(rho) / (1 - lambda(k1, k')).
  std::vector<double> A(lat);
  for (std::size_t idx = 0; idx < lat; ++idx) {
    std::size_t r = idx;
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      s += cosk[r % n + 1];
      r /= n;
    }
    double acc = 0.0;
    for (int k1 = 1; k1 <= n; k1 += 2) acc += norm * at0[k1] * atrho[k1] / (1.0 - (cosk[k1] + s) / d);
    A[idx] = acc;
  }
  // Transform each lateral axis from frequency k to position y.
  std::vector<double> Phi(static_cast<std::size_t>(n * n));  // Phi[y*n + (k-1)]
  for (int y = -rho; y <= rho; ++y)
    for (int k = 1; k <= n; ++k)
      Phi[static_cast<std::size_t>((y + rho) * n + k - 1)] =
          norm * at0[k] * std::sin(k * std::numbers::pi * (y + rho + 1) / (n + 1));
  std::vector<double> tmp(lat);
  std::size_t stride = 1;
  for (int axis = 0; axis < m; ++axis) {
    std::fill(tmp.begin(), tmp.end(), 0.0);
    for (std::size_t idx = 0; idx < lat; ++idx) {
      const std::size_t kk = (idx / stride) % static_cast<std::size_t>(n);
      const std::size_t base = idx - kk * stride;
      const double a = A[idx];
      if (a == 0.0) continue;
      for (int y = 0; y < n; ++y) tmp[base + static_cast<std::size_t>(y) * stride] += Phi[static_cast<std::size_t>(y * n) + kk] * a;
    }
    A.swap(tmp);
    stride *= static_cast<std::size_t>(n);
  }
  // A now holds G_B(0, (rho, y')) on the inner face; exit mass is G/(2d).
  sites_.reserve(static_cast<std::size_t>(2 * d) * lat);
  probs_.reserve(sites_.capacity());
  for (int axis = 0; axis < d; ++axis) {
    for (int sign : {-1, 1}) {
      for (std::size_t idx = 0; idx < lat; ++idx) {
        Point p(d);
        p.x[axis] = sign * (rho + 1);
        std::size_t r = idx;
        for (int i = 0, a = 0; i < d; ++i) {
          if (i == axis) continue;
          p.x[i] = static_cast<Coord>(r % n) - rho;
          r /= n;
          ++a;
        }
        sites_.push_back(p);
        probs_.push_back(std::max(A[idx], 0.0) / (2.0 * d));
      }
    }
  }
  dist_ = boost::random::discrete_distribution<std::uint32_t, double>(probs_.begin(), probs_.end());
}

const std::vector<const ExitKernel*>& ExitKernel::ladder(int d) {
  check_dim(d);
  static std::mutex mu;
  static std::map<int, std::vector<std::unique_ptr<ExitKernel>>> owned;
  static std::map<int, std::vector<const ExitKernel*>> views;
  std::lock_guard<std::mutex> lock(mu);
  auto it = views.find(d);
  if (it != views.end()) return it->second;
  auto& own = owned[d];
  auto& view = views[d];
  for (int rho = 1; rho <= max_radius(d); rho *= 2) {
    own.push_back(std::make_unique<ExitKernel>(d, rho));
    view.push_back(own.back().get());
  }
  return view;
}

const ExitKernel& ExitKernel::get(int d, int rho) {
  for (const auto* k : ladder(d))
    if (k->rho() == rho) return *k;
  throw std::invalid_argument("ExitKernel::get: unsupported rho " + std::to_string(rho));
}

void write_walk_ndjson(std::ostream& os, const WalkResult& w) {
  nlohmann::json j;
  j["sites"] = nlohmann::json::array();
  for (const auto& p : w.path.sites) j["sites"].push_back(p.to_vector());
  j["tag"] = to_string(w.tag);
  os << j.dump() << '\n';
}

}  // namespace ri
