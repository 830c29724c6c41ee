#include "ri/potential.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>
#include <gsl/gsl_integration.h>

namespace ri {

namespace {

struct GaussRule {
  std::vector<double> x, w;
};

GaussRule gauss_legendre(int n, double a, double b) {
  gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n));
  if (!t) throw std::runtime_error("gsl_integration_glfixed_table_alloc failed");
  GaussRule r;
  r.x.resize(static_cast<std::size_t>(n));
  r.w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) gsl_integration_glfixed_point(a, b, static_cast<std::size_t>(i), &r.x[i], &r.w[i], t);
  gsl_integration_glfixed_table_free(t);
  return r;
}

inline double half_versine(double t) {
  double s = std::sin(0.5 * t);
  return 2.0 * s * s;  // 1 - cos t without cancellation
}

}  // namespace

GreenTable::GreenTable(int d, int radius, double tolerance) : d_(d), radius_(radius) {
  if (d != 3 && d != 4) throw DimensionError("Green table supports d = 3 or 4 only");
  if (radius < 0) throw std::invalid_argument("Green table radius must be >= 0");
  const std::size_t e = static_cast<std::size_t>(radius) + 1;
  stride_.assign(static_cast<std::size_t>(d), 1);
  for (int i = d - 2; i >= 0; --i) stride_[i] = stride_[i + 1] * e;

  int n = 32 + 2 * radius;
  std::vector<double> prev = compute(n);
  for (int attempt = 0; attempt < 4; ++attempt) {
    int n2 = n + n / 2;
    std::vector<double> next = compute(n2);
    double err = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) err = std::max(err, std::abs(next[k] - prev[k]));
    n = n2;
    prev = std::move(next);
    error_ = err;
    if (err <= tolerance) break;
  }
  if (error_ > tolerance)
    throw std::runtime_error("Green table quadrature did not reach tolerance; estimate " +
                             std::to_string(error_));
  nodes_ = n;
  table_ = std::move(prev);
}

std::vector<double> GreenTable::compute(int n) const {
  const int R = radius_;
  const std::size_t E = static_cast<std::size_t>(R) + 1;
  const GaussRule gu = gauss_legendre(n, 0.0, std::numbers::pi);
  const GaussRule gv = gauss_legendre(n, 0.0, 1.0);
  std::vector<double> zp(E), cs(E);

  if (d_ == 3) {
    std::vector<double> T(E * E * E, 0.0), F(E * E);
    for (int i = 0; i < n; ++i) {
      const double u = gu.x[i];
      std::fill(F.begin(), F.end(), 0.0);
      for (int j = 0; j < n; ++j) {
        const double v = gv.x[j];
        const double a = half_versine(u) + half_versine(u * v);
        const double root = std::sqrt(a * (a + 2.0));
        const double z = 1.0 + a - root;
        const double w = gu.w[i] * gv.w[j] * u / root;
        double p = w;
        for (std::size_t k = 0; k < E; ++k) {
          zp[k] = p;
          p *= z;
        }
        for (std::size_t k = 0; k < E; ++k) cs[k] = std::cos(u * v * static_cast<double>(k));
        for (std::size_t b = 0; b < E; ++b) {
          double* row = &F[b * E];
          const double c = cs[b];
          for (std::size_t k = 0; k < E; ++k) row[k] += c * zp[k];
        }
      }
      for (std::size_t a1 = 0; a1 < E; ++a1) {
        const double c = std::cos(u * static_cast<double>(a1));
        double* dst = &T[a1 * E * E];
        for (std::size_t k = 0; k < E * E; ++k) dst[k] += c * F[k];
      }
    }
    const double pref = 3.0 / (std::numbers::pi * std::numbers::pi);
    std::vector<double> G(E * E * E);
    for (std::size_t a = 0; a < E; ++a)
      for (std::size_t b = 0; b < E; ++b)
        for (std::size_t c = 0; c < E; ++c)
          G[(a * E + b) * E + c] = pref * (T[(a * E + b) * E + c] + T[(b * E + a) * E + c]);
    return G;
  }

  // d == 4
  const std::size_t E2 = E * E, E3 = E2 * E;
  std::vector<double> T(E3 * E, 0.0), Fi(E3), Fij(E2), cw(E);
  for (int i = 0; i < n; ++i) {
    const double u = gu.x[i];
    std::fill(Fi.begin(), Fi.end(), 0.0);
    for (int j = 0; j < n; ++j) {
      const double v = gv.x[j];
      std::fill(Fij.begin(), Fij.end(), 0.0);
      for (int k = 0; k < n; ++k) {
        const double w3 = gv.x[k];
        const double a = half_versine(u) + half_versine(u * v) + half_versine(u * w3);
        const double root = std::sqrt(a * (a + 2.0));
        const double z = 1.0 + a - root;
        const double w = gu.w[i] * gv.w[j] * gv.w[k] * u * u / root;
        double p = w;
        for (std::size_t m = 0; m < E; ++m) {
          zp[m] = p;
          p *= z;
        }
        for (std::size_t m = 0; m < E; ++m) cw[m] = std::cos(u * w3 * static_cast<double>(m));
        for (std::size_t c = 0; c < E; ++c) {
          double* row = &Fij[c * E];
          for (std::size_t m = 0; m < E; ++m) row[m] += cw[c] * zp[m];
        }
      }
      for (std::size_t b = 0; b < E; ++b) {
        const double c = std::cos(u * v * static_cast<double>(b));
        double* dst = &Fi[b * E2];
        for (std::size_t m = 0; m < E2; ++m) dst[m] += c * Fij[m];
      }
    }
    for (std::size_t a1 = 0; a1 < E; ++a1) {
      const double c = std::cos(u * static_cast<double>(a1));
      double* dst = &T[a1 * E3];
      for (std::size_t m = 0; m < E3; ++m) dst[m] += c * Fi[m];
    }
  }
  const double pref = 4.0 / (std::numbers::pi * std::numbers::pi * std::numbers::pi);
  auto idx = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t e4) {
    return ((a * E + b) * E + c) * E + e4;
  };
  std::vector<double> G(E3 * E);
  for (std::size_t a = 0; a < E; ++a)
    for (std::size_t b = 0; b < E; ++b)
      for (std::size_t c = 0; c < E; ++c)
        for (std::size_t e4 = 0; e4 < E; ++e4)
          G[idx(a, b, c, e4)] = pref * (T[idx(a, b, c, e4)] + T[idx(b, a, c, e4)] + T[idx(c, a, b, e4)]);
  return G;
}

double GreenTable::at_abs(const std::array<Coord, kMaxDim>& a) const {
  std::size_t k = 0;
  for (int i = 0; i < d_; ++i) k += static_cast<std::size_t>(a[i]) * stride_[i];
  return table_[k];
}

double GreenTable::at(const Point& x) const {
  if (x.d != d_) throw DimensionError("Green table dimension mismatch");
  std::array<Coord, kMaxDim> a{};
  for (int i = 0; i < d_; ++i) {
    a[i] = x.x[i] < 0 ? -x.x[i] : x.x[i];
    if (a[i] > radius_)
      throw std::out_of_range("Green function argument " + x.str() + " outside table radius " +
                              std::to_string(radius_));
  }
  std::sort(a.begin(), a.begin() + d_);
  return at_abs(a);
}

std::shared_ptr<const GreenTable> GreenTable::shared(int d, int radius) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const GreenTable>> cache;  // keyed by d
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(d);
  if (it != cache.end() && it->second->radius() >= radius) return it->second;
  int r = std::max(radius, 8);
  r = (r + 7) / 8 * 8;
  auto t = std::make_shared<const GreenTable>(d, r);
  cache[d] = t;
  return t;
}

// ---- equilibrium measure ----

int required_green_radius(const PointSet& K) {
  if (K.empty()) return 0;
  Cuboid c = K.bbox();
  Coord m = 0;
  for (int i = 0; i < c.lo.d; ++i) m = std::max(m, c.hi.x[i] - c.lo.x[i]);
  return static_cast<int>(m);
}

EquilibriumMeasure equilibrium_measure(const PointSet& K, const GreenTable& g, const PotentialOptions& opt) {
  EquilibriumMeasure em;
  if (K.empty()) return em;
  if (K.size() > opt.max_points)
    throw std::invalid_argument("equilibrium_measure: |K| = " + std::to_string(K.size()) +
                                " exceeds cap " + std::to_string(opt.max_points));
  if (K.dim() != g.dim()) throw DimensionError("equilibrium_measure: dimension mismatch");
  if (required_green_radius(K) > g.radius())
    throw std::out_of_range("equilibrium_measure: Green table radius too small");

  const PointSet bd = boundary(K);
  const auto n = static_cast<Eigen::Index>(bd.size());
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) M(i, j) = g(bd[static_cast<std::size_t>(i)], bd[static_cast<std::size_t>(j)]);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const double rc = lu.rcond();
  em.condition_estimate = rc > 0 ? 1.0 / rc : INFINITY;
  if (!std::isfinite(em.condition_estimate) || em.condition_estimate > opt.max_condition)
    throw IllConditioned("equilibrium_measure: ill-conditioned Green matrix", em.condition_estimate);
  Eigen::VectorXd e = lu.solve(Eigen::VectorXd::Ones(n));

  em.support = bd.points();
  em.weights.resize(bd.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    double w = e(i);
    if (w < -1e-10) throw std::runtime_error("equilibrium_measure: negative weight at " + bd[static_cast<std::size_t>(i)].str());
    em.weights[static_cast<std::size_t>(i)] = std::max(w, 0.0);
    em.capacity += em.weights[static_cast<std::size_t>(i)];
  }
  for (const auto& x : K) {
    double s = 0.0;
    for (std::size_t j = 0; j < bd.size(); ++j) s += g(x, bd[j]) * em.weights[j];
    em.max_residual = std::max(em.max_residual, std::abs(s - 1.0));
  }
  return em;
}

EquilibriumMeasure equilibrium_measure(const PointSet& K, const PotentialOptions& opt) {
  if (K.empty()) return {};
  auto g = GreenTable::shared(K.dim(), required_green_radius(K));
  return equilibrium_measure(K, *g, opt);
}

namespace {
std::array<Coord, kMaxDim> orbit_key(const Point& off) {
  std::array<Coord, kMaxDim> k{};
  for (int i = 0; i < off.d; ++i) k[i] = off.x[i] < 0 ? -off.x[i] : off.x[i];
  std::sort(k.begin(), k.begin() + off.d);
  return k;
}
}  // namespace

EquilibriumMeasure box_equilibrium_measure(const Box& b, const GreenTable& g) {
  const int d = b.center.d;
  if (d != g.dim()) throw DimensionError("box_equilibrium_measure: dimension mismatch");
  if (2 * b.radius > g.radius()) throw std::out_of_range("box_equilibrium_measure: Green table radius too small");
  EquilibriumMeasure em;
  if (b.radius == 0) {
    em.support = {b.center};
    em.weights = {1.0 / g.at(Point(d))};
    em.capacity = em.weights[0];
    return em;
  }
  std::vector<Point> bd;
  for (const auto& p : b.cuboid().points())
    if (linf_dist(p, b.center) == b.radius) bd.push_back(p);

  std::map<std::array<Coord, kMaxDim>, int> ids;
  std::vector<int> orbit(bd.size());
  std::vector<Point> reps;
  for (std::size_t i = 0; i < bd.size(); ++i) {
    auto key = orbit_key(bd[i] - b.center);
    auto [it, inserted] = ids.emplace(key, static_cast<int>(reps.size()));
    if (inserted) {
      Point r = b.center;
      for (int a = 0; a < d; ++a) r.x[a] += key[a];
      reps.push_back(r);
    }
    orbit[i] = it->second;
  }
  const auto n = static_cast<Eigen::Index>(reps.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index o = 0; o < n; ++o) {
    const Point& x = reps[static_cast<std::size_t>(o)];
    for (std::size_t i = 0; i < bd.size(); ++i) M(o, orbit[i]) += g(x, bd[i]);
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const double rc = lu.rcond();
  em.condition_estimate = rc > 0 ? 1.0 / rc : INFINITY;
  if (!std::isfinite(em.condition_estimate) || em.condition_estimate > 1e12)
    throw IllConditioned("box_equilibrium_measure: ill-conditioned reduced system", em.condition_estimate);
  Eigen::VectorXd e = lu.solve(Eigen::VectorXd::Ones(n));
  for (Eigen::Index o = 0; o < n; ++o)
    if (e(o) < -1e-10) throw std::runtime_error("box_equilibrium_measure: negative weight");

  em.support = bd;
  em.weights.resize(bd.size());
  for (std::size_t i = 0; i < bd.size(); ++i) {
    em.weights[i] = std::max(e(orbit[i]), 0.0);
    em.capacity += em.weights[i];
  }
  // Residual at the orbit representatives and at the centre.
  std::vector<Point> probes = reps;
  probes.push_back(b.center);
  for (const auto& x : probes) {
    double s = 0.0;
    for (std::size_t i = 0; i < bd.size(); ++i) s += g(x, bd[i]) * em.weights[i];
    em.max_residual = std::max(em.max_residual, std::abs(s - 1.0));
  }
  return em;
}

EquilibriumMeasure box_equilibrium_measure(const Box& b) {
  auto g = GreenTable::shared(b.center.d, static_cast<int>(2 * b.radius));
  return box_equilibrium_measure(b, *g);
}

double capacity(const PointSet& K) { return equilibrium_measure(K).capacity; }

double vacancy_probability(const PointSet& K, double u) {
  if (!(u > 0.0)) throw std::invalid_argument("vacancy_probability: u must be > 0");
  if (K.empty()) return 1.0;
  return std::exp(-u * capacity(K));
}

void write_capacity_csv(std::ostream& os, const std::vector<CapacityRow>& rows) {
  os << "set_id,n_points,capacity,condition_estimate\n";
  char buf[64];
  for (const auto& r : rows) {
    os << r.set_id << ',' << r.n_points << ',';
    std::snprintf(buf, sizeof buf, "%.12g", r.capacity);
    os << buf << ',';
    std::snprintf(buf, sizeof buf, "%.6g", r.condition_estimate);
    os << buf << '\n';
  }
}

}  // namespace ri
