#include "ri/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace ri {

namespace {

using I64 = std::int64_t;
using Scaled = std::array<I64, kMaxDim>;

I64 floor_div(I64 a, I64 b) {
  I64 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// ---- dyadic geometry inside a frame ----

I64 extent(const CoarsePath& p, int k) {
  return (k == 0 ? p.frame.length : p.frame.width) * p.scale();
}

I64 hi(const CoarsePath& p, const DyadicBox& b, int k) { return p.lo(b, k) + p.side(b); }

bool inside(const CoarsePath& p, const DyadicBox& b) {
  for (int k = 0; k < p.frame.d; ++k)
    if (p.lo(b, k) < 0 || hi(p, b, k) > extent(p, k)) return false;
  return true;
}

Scaled to_local(const CoarsePath& p, const Point& y) {
  Scaled v{};
  for (int k = 0; k < p.frame.d; ++k) {
    int g = p.frame.global_axis(k);
    v[k] = (y[g] - p.frame.corner[g]) * p.scale();
  }
  return v;
}

/// Level-n box containing y; lateral coordinates on the upper face are clamped
/// inside, the axis coordinate uses the half-open convention.
DyadicBox containing(const CoarsePath& p, const Scaled& y, int n) {
  DyadicBox b;
  b.level = n;
  I64 side = p.frame.width << (p.depth - n);
  for (int k = 0; k < p.frame.d; ++k) {
    I64 a = floor_div(y[k], side);
    if (k > 0) a = std::clamp<I64>(a, 0, (I64{2} << n) - 1);
    b.index[k] = a;
  }
  return b;
}

DyadicBox child(const DyadicBox& b, unsigned mask, int d) {
  DyadicBox c;
  c.level = b.level + 1;
  for (int k = 0; k < d; ++k) c.index[k] = 2 * b.index[k] + ((mask >> k) & 1u);
  return c;
}

unsigned mask_of(const DyadicBox& c, int d) {
  unsigned m = 0;
  for (int k = 0; k < d; ++k)
    if (c.index[k] & 1) m |= 1u << k;
  return m;
}

DyadicBox parent(const DyadicBox& c, int d) {
  DyadicBox b;
  b.level = c.level - 1;
  for (int k = 0; k < d; ++k) b.index[k] = floor_div(c.index[k], 2);
  return b;
}

DyadicBox child_containing(const CoarsePath& p, const DyadicBox& b, const Scaled& y) {
  DyadicBox c = containing(p, y, b.level + 1);
  if (!(parent(c, p.frame.d) == b)) throw BridgeError("coarse path: end point left its box");
  return c;
}

bool disjoint(const CoarsePath& p, const DyadicBox& a, const DyadicBox& b) {
  for (int k = 0; k < p.frame.d; ++k)
    if (std::min(hi(p, a, k), hi(p, b, k)) <= std::max(p.lo(a, k), p.lo(b, k))) return true;
  return false;
}

/// Coordinate and direction of the face of a shared with b (+1: upper face of a).
std::pair<int, int> shared_face(const CoarsePath& p, const DyadicBox& a, const DyadicBox& b) {
  for (int k = 0; k < p.frame.d; ++k) {
    if (hi(p, a, k) == p.lo(b, k)) return {k, 1};
    if (p.lo(a, k) == hi(p, b, k)) return {k, -1};
  }
  throw BridgeError("coarse path: boxes do not touch");
}

std::string box_str(const DyadicBox& b, int d) {
  std::ostringstream os;
  os << "n" << b.level << "(";
  for (int k = 0; k < d; ++k) os << (k ? "," : "") << b.index[k];
  os << ")";
  return os.str();
}

double ratio_NL(const TubeFrame& F) {
  double L = F.half_width();
  return static_cast<double>(F.length - F.width) / L;
}

}  // namespace

// ---- frames and coarse paths ----

TubeFrame TubeFrame::of(const Tube& T) {
  check_dim(T.dim());
  TubeFrame F;
  F.d = T.dim();
  F.axis = T.axis;
  Cuboid c = T.cuboid();
  F.corner = c.lo.x;
  F.width = 2 * T.L;
  F.length = T.N + 2 * T.L;
  return F;
}

int TubeFrame::global_axis(int k) const {
  if (k == 0) return axis;
  int seen = 0;
  for (int i = 0; i < d; ++i) {
    if (i == axis) continue;
    if (++seen == k) return i;
  }
  throw std::out_of_range("TubeFrame::global_axis");
}

Cuboid TubeFrame::cuboid() const {
  Cuboid c{Point(d), Point(d)};
  for (int i = 0; i < d; ++i) {
    c.lo[i] = corner[i];
    c.hi[i] = corner[i] + (i == axis ? length : width);
  }
  return c;
}

std::array<double, kMaxDim> CoarsePath::center(const DyadicBox& b) const {
  std::array<double, kMaxDim> c{};
  double S = static_cast<double>(scale());
  for (int k = 0; k < frame.d; ++k) {
    int g = frame.global_axis(k);
    c[g] = static_cast<double>(frame.corner[g]) + (static_cast<double>(lo(b, k)) + 0.5 * side(b)) / S;
  }
  return c;
}

double CoarsePath::half_side(const DyadicBox& b) const {
  return 0.5 * static_cast<double>(side(b)) / static_cast<double>(scale());
}

bool dyadic_adjacent(const CoarsePath& p, const DyadicBox& a, const DyadicBox& b) {
  int touching = 0;
  for (int k = 0; k < p.frame.d; ++k) {
    I64 ov = std::min(hi(p, a, k), hi(p, b, k)) - std::max(p.lo(a, k), p.lo(b, k));
    if (ov == 0)
      ++touching;
    else if (ov < 0)
      return false;
  }
  return touching == 1;
}

int coarse_depth(double L, double s) {
  if (!(s > 0) || L < s) throw BridgeError("coarse_depth: need L >= s > 0");
  return static_cast<int>(std::ceil(std::log2(16.0 * L / s) - 1e-12));
}

CoarsePath coarse_path(const Tube& T, const Point& y_C, const Point& y_D, double s, int depth, bool record_rounds) {
  if (!(s >= 1) || static_cast<double>(T.L) < s)
    throw BridgeError("coarse_path: parameter floor violated (need L >= s >= 1), L=" + std::to_string(T.L) +
                      " s=" + fmt(s));
  if (depth < 0) depth = coarse_depth(static_cast<double>(T.L), s);
  return coarse_path(TubeFrame::of(T), y_C, y_D, depth, record_rounds);
}

CoarsePath coarse_path(const TubeFrame& F, const Point& y_C, const Point& y_D, int depth, bool record_rounds) {
  check_dim(F.d);
  if (y_C.d != F.d || y_D.d != F.d) throw DimensionError("coarse_path: dimension mismatch");
  if (depth < 1 || depth > 40) throw BridgeError("coarse_path: depth out of range");
  if (F.width < 1 || F.length < F.width) throw BridgeError("coarse_path: degenerate frame");
  CoarsePath p;
  p.frame = F;
  p.depth = depth;
  p.y_C = y_C;
  p.y_D = y_D;
  const int d = F.d;
  Scaled yc = to_local(p, y_C), yd = to_local(p, y_D);
  if (yc[0] != 0) throw BridgeError("coarse_path: y_C not on the left face");
  if (yd[0] != extent(p, 0)) throw BridgeError("coarse_path: y_D not on the right face");
  for (int k = 1; k < d; ++k)
    if (yc[k] < 0 || yc[k] > extent(p, k) || yd[k] < 0 || yd[k] > extent(p, k))
      throw BridgeError("coarse_path: end point outside the tube cross-section");

  // gamma_0: shortest path of 0-boxes, interior boxes inside the tube
  DyadicBox start = containing(p, yc, 0), target = containing(p, yd, 0);
  std::map<Scaled, Scaled> from;
  std::deque<Scaled> queue{start.index};
  from[start.index] = start.index;
  while (!queue.empty() && !from.count(target.index)) {
    Scaled cur = queue.front();
    queue.pop_front();
    for (int k = 0; k < d; ++k)
      for (int sg : {-1, 1}) {
        DyadicBox nb{0, cur};
        nb.index[k] += sg;
        if (from.count(nb.index)) continue;
        if (!(nb == target) && !inside(p, nb)) continue;
        from[nb.index] = cur;
        queue.push_back(nb.index);
      }
  }
  if (!from.count(target.index)) throw BridgeError("coarse_path: no initial path");
  std::vector<DyadicBox> g;
  for (Scaled c = target.index;; c = from[c]) {
    g.push_back(DyadicBox{0, c});
    if (c == start.index) break;
  }
  std::reverse(g.begin(), g.end());
  if (record_rounds) p.rounds.push_back(g);

  for (int k = 0; k < depth; ++k) {
    const std::size_t l = g.size();
    if (l < 3) throw BridgeError("coarse_path: path too short at round " + std::to_string(k));
    // left end: three children of g[0] from the one holding y_C to the face towards g[1]
    DyadicBox BL = child_containing(p, g[0], yc);
    auto [fc, fdir] = shared_face(p, g[0], g[1]);
    unsigned want = fdir > 0 ? 1u : 0u;
    unsigned mL = mask_of(BL, d), m1 = 0, m2 = 0;
    bool found = false;
    for (int a = 0; a < d && !found; ++a)
      for (int b = 0; b < d && !found; ++b) {
        if (a == b) continue;
        unsigned t1 = mL ^ (1u << a), t2 = t1 ^ (1u << b);
        if (((t2 >> fc) & 1u) == want) {
          m1 = t1;
          m2 = t2;
          found = true;
        }
      }
    std::vector<DyadicBox> left{BL, child(g[0], m1, d), child(g[0], m2, d)};

    // right end
    const DyadicBox& G = g[l - 1];
    const DyadicBox& P = g[l - 2];
    DyadicBox BR = child_containing(p, G, yd);
    DyadicBox left_half = child(G, mask_of(BR, d) & ~1u, d);
    std::vector<DyadicBox> next = left;
    if (inside(p, left_half)) {
      if ((mask_of(BR, d) & 1u) == 0) throw BridgeError("coarse_path: inconsistent right end");
      DyadicBox R1 = left_half;
      DyadicBox R2 = child(G, mask_of(R1, d) ^ 2u, d);
      next.insert(next.end(), g.begin() + 1, g.end() - 1);
      next.insert(next.end(), {R2, R1, BR});
    } else {
      DyadicBox R1 = child(P, mask_of(BR, d) | 1u, d);
      if (l > 3) {
        const DyadicBox& Q = g[l - 3];
        auto [qc, qdir] = shared_face(p, P, Q);
        unsigned qwant = qdir > 0 ? 1u : 0u;
        unsigned m = mask_of(R1, d);
        unsigned m2r = ((m >> qc) & 1u) != qwant ? m ^ (1u << qc) : m ^ (qc != 0 ? 1u : 2u);
        DyadicBox R2 = child(P, m2r, d);
        next.insert(next.end(), g.begin() + 1, g.end() - 2);
        next.insert(next.end(), {R2, R1, BR});
      } else {
        // l == 3: walk inside P from the child facing left.back() to R1
        unsigned s0 = mask_of(left.back(), d) ^ (1u << fc);
        unsigned t = mask_of(R1, d);
        std::vector<int> prev(1u << d, -1);
        std::deque<unsigned> q{s0};
        prev[s0] = static_cast<int>(s0);
        while (!q.empty()) {
          unsigned c = q.front();
          q.pop_front();
          if (c == t) break;
          for (int a = 0; a < d; ++a) {
            unsigned nb = c ^ (1u << a);
            if (prev[nb] < 0) {
              prev[nb] = static_cast<int>(c);
              q.push_back(nb);
            }
          }
        }
        std::vector<DyadicBox> mid;
        for (unsigned c = t;; c = static_cast<unsigned>(prev[c])) {
          mid.push_back(child(P, c, d));
          if (c == s0) break;
        }
        std::reverse(mid.begin(), mid.end());
        next.insert(next.end(), mid.begin(), mid.end());
        next.push_back(BR);
      }
    }
    g = std::move(next);
    if (record_rounds) p.rounds.push_back(g);
  }
  p.start_box = g.front();
  p.end_box = g.back();
  p.boxes.assign(g.begin() + 1, g.end() - 1);
  return p;
}

Check check_coarse_round(const CoarsePath& p, int k) {
  Check c;
  if (k < 0 || static_cast<std::size_t>(k) >= p.rounds.size()) {
    c.fail("round " + std::to_string(k) + " not recorded");
    return c;
  }
  const auto& g = p.rounds[static_cast<std::size_t>(k)];
  const int d = p.frame.d;
  const std::size_t l = g.size();
  double bound = ratio_NL(p.frame) + 4.0 * (k + 1) * d;
  if (l < 3 || static_cast<double>(l) > bound + 1e-9 || (k >= 1 && l < 4)) {
    c.fail("length " + std::to_string(l) + " outside [3, " + fmt(bound) + "]");
    return c;
  }
  if (!(containing(p, to_local(p, p.y_C), k) == g.front())) c.fail("first box does not hold y_C");
  if (!(containing(p, to_local(p, p.y_D), k) == g.back())) c.fail("last box does not hold y_D");
  for (std::size_t i : {std::size_t{0}, std::size_t{1}, std::size_t{2}, l - 3, l - 2, l - 1})
    if (g[i].level != k) c.fail("end box " + std::to_string(i) + " not at level " + std::to_string(k));
  for (std::size_t i = 0; i < l; ++i) {
    if (i > 0 && i + 1 < l && !inside(p, g[i])) c.fail("box " + box_str(g[i], d) + " leaves the tube");
    if (i + 1 < l) {
      if (std::abs(g[i].level - g[i + 1].level) > 1) c.fail("level jump at " + std::to_string(i));
      if (!dyadic_adjacent(p, g[i], g[i + 1])) c.fail("boxes " + std::to_string(i) + "," + std::to_string(i + 1) + " not adjacent");
    }
    for (std::size_t j = i + 1; j < l; ++j)
      if (!disjoint(p, g[i], g[j])) c.fail("boxes " + std::to_string(i) + "," + std::to_string(j) + " overlap");
  }
  return c;
}

Check check_coarse_path(const CoarsePath& p, double s) {
  Check c;
  const int d = p.frame.d;
  const auto& g = p.boxes;
  const std::size_t l = g.size();
  double L = p.frame.half_width();
  double len_bound = ratio_NL(p.frame) + 5.0 * d * std::log2(64.0 * L / s);
  if (l < 2 || static_cast<double>(l) > len_bound + 1e-9) {
    c.fail("length " + std::to_string(l) + " outside [2, " + fmt(len_bound) + "]");
    return c;
  }
  // i)
  if (p.start_box.level != g.front().level || !dyadic_adjacent(p, p.start_box, g.front()) ||
      !(containing(p, to_local(p, p.y_C), p.start_box.level) == p.start_box))
    c.fail("i) first box not next to a same-size box holding y_C");
  if (p.end_box.level != g.back().level || !dyadic_adjacent(p, p.end_box, g.back()) ||
      !(containing(p, to_local(p, p.y_D), p.end_box.level) == p.end_box))
    c.fail("i) last box not next to a same-size box holding y_D");
  // ii)
  int max_level = coarse_depth(L, s);
  for (std::size_t i = 0; i < l; ++i) {
    if (!inside(p, g[i])) c.fail("ii) box " + box_str(g[i], d) + " leaves the tube");
    if (g[i].level < 0 || g[i].level > max_level) c.fail("ii) level of box " + std::to_string(i) + " exceeds " + std::to_string(max_level));
    if (i + 1 < l) {
      if (std::abs(g[i].level - g[i + 1].level) > 1) c.fail("ii) level jump at " + std::to_string(i));
      if (!dyadic_adjacent(p, g[i], g[i + 1])) c.fail("boxes " + std::to_string(i) + "," + std::to_string(i + 1) + " not adjacent");
    }
    for (std::size_t j = i + 1; j < l; ++j)
      if (!disjoint(p, g[i], g[j])) c.fail("path not simple at " + std::to_string(i) + "," + std::to_string(j));
  }
  // iii)
  if (g.front().level != p.depth || g.back().level != p.depth) c.fail("iii) end boxes not at the finest level");
  if (p.depth == max_level && 2.0 * p.half_side(g.front()) > s / 16.0 + 1e-9) c.fail("iii) end box side exceeds s/16");
  return c;
}

// ---- one-dimensional bridge ----

double interval_floor(double xi) {
  if (!(xi > 0.5 && xi < 1)) throw BridgeError("xi must lie in (1/2, 1)");
  return std::pow(3.0, 1.0 / (1.0 - xi));
}

std::vector<Interval> interval_bridge(double R, double r, double xi) {
  double floor_r = interval_floor(xi);
  if (!(R >= 4) || !(r >= floor_r) || r > R / 4 * (1 + 1e-12))
    throw BridgeError("interval_bridge: parameter floor violated (need R >= 4, " + fmt(floor_r) + " <= r <= R/4), R=" +
                      fmt(R) + " r=" + fmt(r));
  double q = std::pow(r, xi);
  double step = r + 2 * q;
  auto kt = static_cast<long>(std::floor(R / step));
  std::vector<Interval> out;
  auto J = [&](long i) { return Interval{(i - 1) * r + 2 * i * q, i * step}; };
  if (R - kt * step <= 5 * q) {
    for (long i = 1; i < kt; ++i) out.push_back(J(i));
    out.push_back({(kt - 1) * r + 2 * kt * q, kt * step - 2 * q});
  } else {
    for (long i = 1; i <= kt; ++i) out.push_back(J(i));
    out.push_back({kt * r + 2 * (kt + 1) * q, R - 2 * q});
  }
  return out;
}

Check check_interval_bridge(const std::vector<Interval>& I, double R, double r, double xi) {
  Check c;
  double q = std::pow(r, xi), tol = 1e-9 * std::max(1.0, R);
  if (I.empty()) {
    c.fail("no intervals");
    return c;
  }
  if (static_cast<double>(I.size()) > 1 + R / r + 1e-12) c.fail("k = " + std::to_string(I.size()) + " exceeds 1 + R/r");
  double front = I.front().first, back = R - I.back().second;
  if (front < 2 * q - tol || front > 7 * q + tol) c.fail("left end gap " + fmt(front) + " outside [2r^xi, 7r^xi]");
  if (back < 2 * q - tol || back > 7 * q + tol) c.fail("right end gap " + fmt(back) + " outside [2r^xi, 7r^xi]");
  for (std::size_t i = 0; i < I.size(); ++i) {
    double len = I[i].second - I[i].first;
    if (len < q - tol || len > r + tol) c.fail("length of interval " + std::to_string(i) + " = " + fmt(len) + " outside [r^xi, r]");
    if (i + 1 < I.size()) {
      double gap = I[i + 1].first - I[i].second;
      if (std::abs(gap - 2 * q) > tol) c.fail("gap after interval " + std::to_string(i) + " = " + fmt(gap) + " != 2r^xi");
    }
  }
  return c;
}

// ---- bridges ----

std::size_t Bridge::box_count() const {
  std::size_t n = 0;
  for (const auto& l : levels) n += l.size();
  return n;
}

CuboidUnion CuboidUnion::of_points(const PointSet& s) {
  CuboidUnion u;
  u.parts.reserve(s.size());
  for (const Point& p : s) u.parts.push_back(Cuboid{p, p});
  return u;
}

double default_m(double xi) {
  (void)interval_floor(xi);
  return 2.5;
}

double default_s_min(double xi) { return std::max(40.0, 0.8 * interval_floor(xi)); }

double specialized_floor(double xi) { return std::max(64.0, 4.0 * interval_floor(xi)); }

namespace {

double dist(const Interval& a, const Interval& b) {
  if (a.second <= b.first) return b.first - a.second;
  if (b.second <= a.first) return a.first - b.second;
  return 0;
}

std::vector<Interval> complement(std::vector<Interval> used, double a, double b) {
  std::sort(used.begin(), used.end());
  std::vector<Interval> out;
  double cur = a;
  for (const auto& I : used) {
    if (I.first > cur) out.push_back({cur, I.first});
    cur = std::max(cur, I.second);
  }
  if (b > cur) out.push_back({cur, b});
  return out;
}

}  // namespace

IntervalFamilies specialized_intervals(double L, double N, double s, double xi) {
  if (!(L >= s) || !(s >= specialized_floor(xi)))
    throw BridgeError("specialized bridge: parameter floor violated (need L >= s >= " + fmt(specialized_floor(xi)) + "), L=" +
                      fmt(L) + " s=" + fmt(s));
  const double a = -L, b = N + L;
  IntervalFamilies f;
  std::vector<Interval> all;
  auto place = [&](const Interval& host) {
    double R = host.second - host.first;
    std::vector<Interval> out = interval_bridge(R, R / 4, xi);
    for (auto& I : out) {
      I.first += host.first;
      I.second += host.first;
    }
    return out;
  };
  std::vector<Interval> first = interval_bridge(b - a, L / 2, xi);
  for (auto& I : first) {
    I.first += a;
    I.second += a;
  }
  auto separation = [&](const std::vector<Interval>& fresh) {
    const double sx = 0.5 * std::pow(s, xi);
    for (const auto& I : fresh) {
      double len = I.second - I.first;
      double need = std::max(2 * std::pow(len, xi), sx);
      double tol = 1e-9 * std::max(1.0, b - a);
      if (len < std::sqrt(s) / 100 - tol)
        throw BridgeError("specialized bridge: interval [" + fmt(I.first) + ", " + fmt(I.second) + "] shorter than sqrt(s)/100");
      if (I.first - a < need - tol || b - I.second < need - tol)
        throw BridgeError("specialized bridge: interval [" + fmt(I.first) + ", " + fmt(I.second) + "] too close to the tube ends");
      for (const auto& J : all)
        if (!(J == I) && dist(I, J) < need - tol)
          throw BridgeError("specialized bridge: interval [" + fmt(I.first) + ", " + fmt(I.second) + "] too close to [" +
                            fmt(J.first) + ", " + fmt(J.second) + "]");
    }
  };
  all = first;
  separation(first);
  f.levels.push_back(first);
  for (int round = 0;; ++round) {
    if (round > 64) throw BridgeError("specialized bridge: recursion does not terminate");
    std::vector<Interval> residual = complement(all, a, b);
    std::vector<Interval> fresh;
    for (const auto& I : residual)
      if (I.second - I.first > s) {
        auto part = place(I);
        fresh.insert(fresh.end(), part.begin(), part.end());
      }
    if (fresh.empty()) {
      f.residual = residual;
      break;
    }
    all.insert(all.end(), fresh.begin(), fresh.end());
    separation(fresh);
    if (fresh.size() > 8 * f.levels.back().size())
      throw BridgeError("specialized bridge: family grew more than eightfold in round " + std::to_string(round + 2));
    f.levels.push_back(fresh);
  }
  return f;
}

namespace {

Box axis_box(const Tube& T, Coord lo, Coord hi_) {
  // lattice range [lo, hi_] of local axis coordinates, odd count
  Point c = T.base;
  c[T.axis] += (lo + hi_) / 2;
  return Box(c, (hi_ - lo) / 2);
}

BridgeBox marked_box(const Box& b, int axis) {
  BridgeBox m{b, std::array<Point, 2>{b.center, b.center}};
  (*m.marked)[0][axis] -= b.radius;
  (*m.marked)[1][axis] += b.radius;
  return m;
}

bool box_less(const BridgeBox& a, const BridgeBox& b) {
  if (a.box.center != b.box.center) return a.box.center < b.box.center;
  return a.box.radius < b.box.radius;
}

void canonical(Bridge& b) {
  for (auto& l : b.levels) std::sort(l.begin(), l.end(), box_less);
}

}  // namespace

Bridge specialized_bridge(const Tube& T, double s, double xi) {
  check_dim(T.dim());
  IntervalFamilies f = specialized_intervals(static_cast<double>(T.L), static_cast<double>(T.N), s, xi);
  Bridge br;
  br.s = s;
  br.s_prime = std::sqrt(s) / 100;
  br.xi = xi;
  br.m = default_m(xi);
  br.tube = T;
  std::vector<std::pair<Coord, Coord>> ranges;
  for (const auto& fam : f.levels) {
    std::vector<BridgeBox> lvl;
    for (const auto& I : fam) {
      auto lo = static_cast<Coord>(std::ceil(I.first));
      auto hi_ = static_cast<Coord>(std::floor(I.second));
      if ((hi_ - lo) % 2 != 0) --hi_;
      if (hi_ - lo < 2)
        throw BridgeError("specialized bridge: interval [" + fmt(I.first) + ", " + fmt(I.second) + "] too short for the lattice");
      ranges.push_back({lo, hi_});
      lvl.push_back(marked_box(axis_box(T, lo, hi_), T.axis));
    }
    br.levels.push_back(std::move(lvl));
  }
  std::sort(ranges.begin(), ranges.end());
  std::vector<BridgeBox> holes;
  auto hole = [&](Coord lo, Coord hi_) {
    if (hi_ - lo > 2 * static_cast<Coord>(std::floor(s)))
      throw BridgeError("specialized bridge: residual [" + std::to_string(lo) + ", " + std::to_string(hi_) + "] wider than 2s");
    holes.push_back(BridgeBox{axis_box(T, lo, hi_), std::nullopt});
  };
  Coord left = -T.L, right = T.N + T.L;
  Coord prev = left - 1;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    auto [lo, hi_] = ranges[i];
    Coord c = lo - prev - 1;
    if (c > 0) {
      // extend an even gap by one site into the next box
      if (c % 2 == 1)
        hole(prev + 1, lo - 1);
      else
        hole(prev + 1, lo);
    }
    prev = hi_;
  }
  Coord c = right - prev;
  if (c > 0) {
    if (c % 2 == 1)
      hole(prev + 1, right);
    else
      hole(prev, right);
  }
  br.levels.push_back(std::move(holes));
  canonical(br);
  return br;
}

namespace {

Coord round_half_down(double v) { return static_cast<Coord>(std::ceil(v - 0.5)); }

/// Smallest box containing a and b.
Box enclosing_box(const Point& a, const Point& b) {
  Coord delta = linf_dist(a, b);
  Coord r = (delta + 1) / 2;
  Point c(a.d);
  for (int i = 0; i < a.d; ++i) c[i] = floor_div(std::min(a[i], b[i]) + std::max(a[i], b[i]), 2);
  return Box(c, r);
}

Point clamp_into(const Point& y, const Box& b) {
  Point q = y;
  for (int i = 0; i < y.d; ++i) q[i] = std::clamp(y[i], b.center[i] - b.radius, b.center[i] + b.radius);
  return q;
}

std::string dump(const Bridge& b) {
  std::ostringstream os;
  write_bridge_json(os, b);
  return os.str();
}

}  // namespace

Bridge general_bridge(const PointSet& C, const PointSet& D, const Tube& T, double s, const BridgeParams& prm) {
  check_dim(T.dim());
  const int d = T.dim();
  const double xi = prm.xi;
  (void)interval_floor(xi);
  if (C.empty() || D.empty() || C.dim() != d || D.dim() != d) throw std::invalid_argument("general_bridge: bad C or D");
  if (!set_intersection(C, D).empty()) throw std::invalid_argument("general_bridge: C and D intersect");
  double s_min = default_s_min(xi);
  if (!(s >= s_min) || static_cast<double>(T.L) < 2 * s)
    throw BridgeError("general_bridge: parameter floor violated (need L >= 2s, s >= " + fmt(s_min) + "), L=" +
                      std::to_string(T.L) + " s=" + fmt(s));
  const double m = prm.m > 0 ? prm.m : default_m(xi);
  std::vector<Point> CT, DT;
  for (const Point& p : C)
    if (T.contains(p)) CT.push_back(p);
  for (const Point& p : D)
    if (T.contains(p)) DT.push_back(p);
  if (CT.empty() || DT.empty()) throw std::invalid_argument("general_bridge: C or D misses the tube");

  // closest pair, first in lexicographic order
  Coord best = -1;
  Point yc, yd;
  for (const Point& a : CT)
    for (const Point& b : DT) {
      Coord dd = linf_dist(a, b);
      if (best < 0 || dd < best) {
        best = dd;
        yc = a;
        yd = b;
      }
    }
  const Coord Dist = best;
  int jp = 0;
  while (std::abs(yc[jp] - yd[jp]) != Dist) ++jp;
  const Point& yl = yc[jp] < yd[jp] ? yc : yd;
  const Point& yr = yc[jp] < yd[jp] ? yd : yc;
  Cuboid Tc = T.cuboid();

  TubeFrame F;
  F.d = d;
  F.axis = jp;
  F.corner = Tc.lo.x;
  F.corner[jp] = yl[jp];
  F.length = Dist;
  if (jp == T.axis && Dist >= 2 * T.L) {
    F.width = 2 * T.L;
  } else {
    F.width = Dist;
    for (int i = 0; i < d; ++i) {
      if (i == jp) continue;
      Coord mn = std::min(yl[i], yr[i]), mx = std::max(yl[i], yr[i]);
      Coord lo_min = std::max(Tc.lo[i], mx - Dist), lo_max = std::min(Tc.hi[i] - Dist, mn);
      if (lo_min > lo_max) throw BridgeError("general_bridge: reduced box does not fit in the tube");
      F.corner[i] = std::clamp(floor_div(mn + mx - Dist, 2), lo_min, lo_max);
    }
  }

  Bridge br;
  br.s = s;
  br.s_prime = std::pow(s, 0.25) / 200;
  br.m = m;
  br.xi = xi;
  br.tube = T;

  if (F.half_width() < s) {
    Point x(d);
    for (int i = 0; i < d; ++i) x[i] = F.corner[i] + (i == jp ? F.length : F.width) / 2;
    br.levels.push_back({BridgeBox{Box(x, static_cast<Coord>(std::floor(s))), std::nullopt}});
  } else {
    // shallowest depth whose end boxes still fit an end hole of radius <= s
    const double two_s = 2 * std::floor(s);
    int K = 1;
    for (;; ++K) {
      double side = F.half_width() / std::ldexp(1.0, K);
      if (side < 2) throw BridgeError("general_bridge: no refinement depth fits end holes of radius s");
      if (side + std::ceil(std::pow(side / 2, xi)) + 4 <= two_s) break;
    }
    CoarsePath cp = coarse_path(F, yl, yr, K);
    const auto& g = cp.boxes;
    const std::size_t l = g.size();
    std::vector<Box> shrunk;
    for (const auto& db : g) {
      auto c = cp.center(db);
      double h = cp.half_side(db);
      double mu = std::ceil(std::pow(h, xi)) + 2;
      Point x(d);
      double dev = 0;
      for (int i = 0; i < d; ++i) {
        x[i] = round_half_down(c[i]);
        dev = std::max(dev, std::abs(static_cast<double>(x[i]) - c[i]));
      }
      auto rho = static_cast<Coord>(std::floor(h - mu - dev));
      if (rho < 1) throw BridgeError("general_bridge: coarse box " + box_str(db, d) + " vanishes after shrinking");
      shrunk.emplace_back(x, rho);
    }
    std::vector<Point> in_mark(l), out_mark(l);
    std::vector<Bridge> subs;
    for (std::size_t j = 0; j + 1 < l; ++j) {
      auto [k, sg] = shared_face(cp, g[j], g[j + 1]);
      int ax = F.global_axis(k);
      const Box &A = shrunk[j], &B = shrunk[j + 1];
      Point p(d), q(d);
      Coord overlap = std::numeric_limits<Coord>::max();  // half-width of the shared cross-section
      for (int i = 0; i < d; ++i) {
        if (i == ax) continue;
        Coord lo_i = std::max(A.center[i] - A.radius, B.center[i] - B.radius);
        Coord hi_i = std::min(A.center[i] + A.radius, B.center[i] + B.radius);
        if (lo_i > hi_i)
          throw BridgeError("general_bridge: shrunk boxes " + box_str(g[j], d) + " and " + box_str(g[j + 1], d) + " do not face each other");
        p[i] = q[i] = floor_div(lo_i + hi_i, 2);
        overlap = std::min(overlap, (hi_i - lo_i) / 2);
      }
      p[ax] = A.center[ax] + sg * A.radius;
      q[ax] = B.center[ax] - sg * B.radius;
      Coord lambda = sg * (q[ax] - p[ax]);
      if (lambda < 2) throw BridgeError("general_bridge: shrunk boxes touch");
      out_mark[j] = p;
      in_mark[j + 1] = q;
      Coord lo = std::min(p[ax], q[ax]);
      Coord rho_small = std::min(A.radius, B.radius);
      Coord Lj = std::max(static_cast<Coord>(std::ceil(s)), static_cast<Coord>(std::floor(std::pow(static_cast<double>(rho_small), xi))));
      Lj = std::min(Lj, lambda / 2);
      if (static_cast<double>(lambda) > 2 * s && s >= specialized_floor(xi) && static_cast<double>(Lj) >= s) {
        Tube Tj;
        Tj.axis = ax;
        Tj.L = Lj;
        Tj.N = lambda - 2 * Lj;
        Tj.base = p;
        Tj.base[ax] = lo + Lj;
        subs.push_back(specialized_bridge(Tj, s, xi));
      } else {
        // chain of touching holes over the sites strictly between p and q
        Coord cap = std::max<Coord>(0, std::min(static_cast<Coord>(std::floor(s)), overlap / 2 - 1));
        Coord inner = lambda - 1;
        Coord k = (inner + 2 * cap) / (2 * cap + 1);
        Coord total = 0, A_ = 0;
        for (;; ++k) {
          total = (inner - k) % 2 == 0 ? inner : inner + 1;
          A_ = (total - k) / 2;
          if ((A_ + k - 1) / k <= cap) break;
        }
        Bridge chain;
        chain.levels.emplace_back();
        Coord cur = lo + 1;
        for (Coord i = 0; i < k; ++i) {
          Coord a_i = A_ / k + (i < A_ % k ? 1 : 0);
          Point c = p;
          c[ax] = cur + a_i;
          chain.levels[0].push_back(BridgeBox{Box(c, a_i), std::nullopt});
          cur += 2 * a_i + 1;
        }
        subs.push_back(std::move(chain));
      }
    }
    in_mark[0] = clamp_into(yl, shrunk[0]);
    out_mark[l - 1] = clamp_into(yr, shrunk[l - 1]);
    Box BL = enclosing_box(yl, in_mark[0]);
    Box BR = enclosing_box(yr, out_mark[l - 1]);
    if (static_cast<double>(std::max(BL.radius, BR.radius)) > s) throw BridgeError("general_bridge: end hole wider than s");

    std::size_t maxJ = 1;
    for (const auto& sb : subs) maxJ = std::max(maxJ, sb.J());
    br.levels.assign(maxJ + 1, {});
    for (std::size_t j = 0; j < l; ++j) br.levels[0].push_back(BridgeBox{shrunk[j], std::array<Point, 2>{in_mark[j], out_mark[j]}});
    for (const auto& sb : subs) {
      for (std::size_t i = 0; i + 1 < sb.J(); ++i)
        br.levels[i + 1].insert(br.levels[i + 1].end(), sb.levels[i].begin(), sb.levels[i].end());
      br.levels.back().insert(br.levels.back().end(), sb.holes().begin(), sb.holes().end());
    }
    br.levels.back().push_back(BridgeBox{BL, std::nullopt});
    br.levels.back().push_back(BridgeBox{BR, std::nullopt});
  }
  canonical(br);
  if (prm.validate) {
    BridgeReport rep = validate_bridge(br, C, D);
    if (!rep.ok()) throw BridgeError("general_bridge: " + rep.summary() + "\n" + dump(br));
  }
  return br;
}

// ---- validation ----

std::string BridgeReport::summary() const {
  std::ostringstream os;
  auto one = [&](const char* name, const Check& c) {
    os << name << (c.ok ? " pass" : " FAIL");
    if (!c.ok) os << " (" << c.message << ")";
    os << "; ";
  };
  one("B1", b1);
  one("B2", b2);
  one("B3", b3);
  one("B4", b4);
  one("containment", containment);
  os << "boxes=" << boxes << "/" << box_bound << " J=" << J << "/" << J_bound;
  return os.str();
}

namespace {

struct Dsu {
  std::vector<std::size_t> parent;
  explicit Dsu(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

/// Straight lattice path from p to q, one axis after another.
std::vector<Cuboid> straight_path(const Point& p, const Point& q) {
  std::vector<Cuboid> segs;
  Point cur = p;
  for (int i = 0; i < p.d; ++i) {
    if (cur[i] == q[i]) continue;
    Cuboid c{cur, cur};
    c.lo[i] = std::min(cur[i], q[i]);
    c.hi[i] = std::max(cur[i], q[i]);
    segs.push_back(c);
    cur[i] = q[i];
  }
  if (segs.empty()) segs.push_back(Cuboid{p, p});
  return segs;
}

std::string box_text(const Box& b) { return "B(" + b.center.str() + ", " + std::to_string(b.radius) + ")"; }

}  // namespace

BridgeReport validate_bridge(const Bridge& b, const PointSet& C, const PointSet& D) {
  return validate_bridge(b, CuboidUnion::of_points(C), CuboidUnion::of_points(D));
}

BridgeReport validate_bridge(const Bridge& b, const CuboidUnion& C, const CuboidUnion& D) {
  BridgeReport r;
  r.boxes = b.box_count();
  r.J = b.J();
  if (b.levels.empty()) {
    r.b2.fail("no levels");
    return r;
  }
  const std::size_t J = b.J();
  const Tube& T = b.tube;
  const double L = static_cast<double>(T.L), N = static_cast<double>(T.N);
  const int d = T.dim();

  // B3 and containment
  Cuboid Tc = T.cuboid(), Ts = Tc.grown(static_cast<Coord>(std::floor(b.s)));
  for (std::size_t j = 0; j < J; ++j)
    for (const auto& bb : b.levels[j]) {
      double rad = static_cast<double>(bb.box.radius);
      bool hole = j + 1 == J;
      if (!hole && rad < b.s_prime) r.b3.fail(box_text(bb.box) + " below s'");
      if (hole && rad > b.s) r.b3.fail("hole " + box_text(bb.box) + " above s");
      if (!Ts.contains(bb.box.cuboid())) r.containment.fail(box_text(bb.box) + " leaves B(T, s)");
      if (!hole && !Tc.contains(bb.box.cuboid())) r.containment.fail(box_text(bb.box) + " leaves T");
    }

  // B1
  for (std::size_t j = 0; j + 1 < J; ++j)
    for (const auto& bb : b.levels[j]) {
      const Box& B = bb.box;
      Coord grow = static_cast<Coord>(std::ceil(std::pow(static_cast<double>(B.radius), b.xi)));
      Cuboid inflated = Box(B.center, B.radius + grow).cuboid();
      for (std::size_t j2 = 0; j2 <= j; ++j2)
        for (const auto& other : b.levels[j2]) {
          if (&other == &bb) continue;
          if (inflated.l1_gap(other.box.cuboid()) < 2) r.b1.fail(box_text(B) + " inflated meets closure of " + box_text(other.box));
        }
      for (const CuboidUnion* S : {&C, &D})
        for (const Cuboid& part : S->parts)
          if (inflated.l1_gap(part) < 2) r.b1.fail(box_text(B) + " inflated meets closure of C or D at " + part.lo.str());
    }
  {
    const auto& H = b.holes();
    std::vector<Cuboid> grown;
    for (const auto& h : H) grown.push_back(Box(h.box.center, static_cast<Coord>(std::floor(static_cast<double>(h.box.radius) + b.s_prime))).cuboid());
    for (std::size_t i = 0; i < H.size(); ++i)
      for (std::size_t k = i + 1; k < H.size(); ++k)
        if (!grown[i].intersect(grown[k]).empty())
          r.b1.fail("holes " + box_text(H[i].box) + " and " + box_text(H[k].box) + " overlap after s'-inflation");
  }

  // B2
  {
    std::vector<std::vector<Cuboid>> pieces;
    std::vector<std::string> names;
    for (const Cuboid& c : C.parts) {
      pieces.push_back({c});
      names.push_back("C at " + c.lo.str());
    }
    std::size_t nC = pieces.size();
    for (const Cuboid& c : D.parts) {
      pieces.push_back({c});
      names.push_back("D at " + c.lo.str());
    }
    if (C.parts.empty() || D.parts.empty()) r.b2.fail("C or D empty");
    for (std::size_t j = 0; j < J; ++j)
      for (const auto& bb : b.levels[j]) {
        if (j + 1 == J) {
          pieces.push_back({bb.box.cuboid()});
          names.push_back("hole " + box_text(bb.box));
          continue;
        }
        if (!bb.marked) {
          r.b2.fail(box_text(bb.box) + " has no marked points");
          continue;
        }
        const auto& mk = *bb.marked;
        for (const Point& p : mk)
          if (linf_dist(p, bb.box.center) != bb.box.radius) r.b2.fail("marked point " + p.str() + " not on the boundary of " + box_text(bb.box));
        pieces.push_back(straight_path(mk[0], mk[1]));
        names.push_back("path in " + box_text(bb.box));
      }
    std::vector<Cuboid> bbox;
    for (const auto& pc : pieces) {
      Cuboid u = pc.front();
      for (const Cuboid& c : pc)
        for (int i = 0; i < d; ++i) {
          u.lo[i] = std::min(u.lo[i], c.lo[i]);
          u.hi[i] = std::max(u.hi[i], c.hi[i]);
        }
      bbox.push_back(u);
    }
    Dsu dsu(pieces.size());
    for (std::size_t i = 0; i < pieces.size(); ++i)
      for (std::size_t k = i + 1; k < pieces.size(); ++k) {
        if (dsu.find(i) == dsu.find(k) || bbox[i].l1_gap(bbox[k]) > 1) continue;
        bool touch = false;
        for (const Cuboid& a : pieces[i]) {
          for (const Cuboid& c : pieces[k])
            if (a.l1_gap(c) <= 1) {
              touch = true;
              break;
            }
          if (touch) break;
        }
        if (touch) dsu.unite(i, k);
      }
    for (std::size_t i = 0; i < pieces.size(); ++i)
      if (dsu.find(i) != dsu.find(0)) {
        r.b2.fail(names[i] + " is not connected to C" + (i < nC ? std::string(" (C itself disconnected)") : std::string()));
        break;
      }
  }

  // B4
  if (T.L < 1) {
    r.b4.fail("tube radius must be positive");
  } else {
    double leL = std::log(std::exp(1.0) * L);
    r.box_bound = (N / L + 8.0 * d * leL) * std::pow(leL, b.m);
    r.J_bound = b.m * std::log(std::log(std::exp(2.0) * L));
    if (static_cast<double>(r.boxes) > r.box_bound) r.b4.fail("|B| = " + std::to_string(r.boxes) + " > " + fmt(r.box_bound));
    if (static_cast<double>(r.J) > r.J_bound) r.b4.fail("J = " + std::to_string(r.J) + " > " + fmt(r.J_bound));
  }
  return r;
}

// ---- dense sub-families ----

DenseResult dense_subfamily(std::vector<std::int64_t> indices, std::int64_t K, double beta, std::int64_t Gamma) {
  if (K < 1 || Gamma < 1 || !(beta > 0 && beta <= 1)) throw std::invalid_argument("dense_subfamily: need K, Gamma >= 1 and beta in (0, 1]");
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  for (auto k : indices)
    if (k < 1 || k > K) throw std::invalid_argument("dense_subfamily: index " + std::to_string(k) + " outside [1, K]");
  DenseResult res;
  const double n = static_cast<double>(indices.size());
  const double kg = static_cast<double>(K) / static_cast<double>(Gamma);
  res.regime_bound = (n - kg) / (1 + kg);
  res.target = static_cast<std::size_t>(std::ceil(beta * static_cast<double>(Gamma) - 1e-9));
  if (n < beta * static_cast<double>(K))
    throw std::invalid_argument("dense_subfamily: fewer than beta K indices (" + std::to_string(indices.size()) + ")");
  std::size_t best_start = 0, best_len = 0;
  for (std::size_t i = 0; i < indices.size();) {
    std::size_t j = i + 1;
    while (j < indices.size() && indices[j] - indices[j - 1] <= Gamma) ++j;
    if (j - i > best_len) {
      best_len = j - i;
      best_start = i;
    }
    i = j;
  }
  res.longest_run = best_len;
  if (best_len < res.target)
    throw std::invalid_argument("dense_subfamily: longest run " + std::to_string(best_len) + " shorter than ceil(beta Gamma) = " +
                                std::to_string(res.target));
  res.subset.assign(indices.begin() + static_cast<std::ptrdiff_t>(best_start),
                    indices.begin() + static_cast<std::ptrdiff_t>(best_start + res.target));
  return res;
}

// ---- output ----

void write_bridge_json(std::ostream& os, const Bridge& b) {
  using nlohmann::json;
  json j;
  j["tube"] = {{"base", b.tube.base.to_vector()}, {"axis", b.tube.axis}, {"L", b.tube.L}, {"N", b.tube.N}};
  j["s"] = b.s;
  j["s_prime"] = b.s_prime;
  j["m"] = b.m;
  j["xi"] = b.xi;
  j["J"] = b.J();
  j["levels"] = json::array();
  for (const auto& l : b.levels) {
    json arr = json::array();
    for (const auto& bb : l) {
      json e{{"center", bb.box.center.to_vector()}, {"radius", bb.box.radius}};
      if (bb.marked) e["marked"] = {(*bb.marked)[0].to_vector(), (*bb.marked)[1].to_vector()};
      arr.push_back(e);
    }
    j["levels"].push_back(arr);
  }
  os << j.dump() << "\n";
}

void write_bridge_svg(std::ostream& os, const Bridge& b, int axis, Coord value) {
  const int d = b.tube.dim();
  int u = -1, v = -1;
  for (int i = 0; i < d; ++i) {
    if (i == axis) continue;
    if (u < 0)
      u = i;
    else if (v < 0)
      v = i;
  }
  Cuboid view = b.tube.cuboid().grown(static_cast<Coord>(std::floor(b.s)) + 1);
  const double px = 4;
  auto X = [&](Coord x) { return static_cast<double>(x - view.lo[u]) * px; };
  auto Y = [&](Coord y) { return static_cast<double>(y - view.lo[v]) * px; };
  double W = X(view.hi[u] + 1), H = Y(view.hi[v] + 1);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H
     << "\">\n";
  auto rect = [&](const Cuboid& c, const char* fill, const char* stroke, double opacity) {
    os << "<rect x=\"" << X(c.lo[u]) << "\" y=\"" << Y(c.lo[v]) << "\" width=\"" << X(c.hi[u] + 1) - X(c.lo[u]) << "\" height=\""
       << Y(c.hi[v] + 1) - Y(c.lo[v]) << "\" fill=\"" << fill << "\" fill-opacity=\"" << opacity << "\" stroke=\"" << stroke
       << "\"/>\n";
  };
  Cuboid Tc = b.tube.cuboid();
  if (Tc.lo[axis] <= value && value <= Tc.hi[axis]) rect(Tc, "none", "black", 0);
  static const char* colors[] = {"#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#17becf"};
  for (std::size_t j = 0; j < b.J(); ++j)
    for (const auto& bb : b.levels[j]) {
      Cuboid c = bb.box.cuboid();
      if (c.lo[axis] > value || c.hi[axis] < value) continue;
      bool hole = j + 1 == b.J();
      rect(c, hole ? "#d62728" : colors[j % 5], hole ? "#d62728" : colors[j % 5], hole ? 0.5 : 0.25);
      if (bb.marked)
        for (const Point& p : *bb.marked)
          if (p[axis] == value)
            os << "<circle cx=\"" << X(p[u]) + px / 2 << "\" cy=\"" << Y(p[v]) + px / 2 << "\" r=\"" << px / 2 << "\" fill=\"black\"/>\n";
    }
  os << "</svg>\n";
}

}  // namespace ri
