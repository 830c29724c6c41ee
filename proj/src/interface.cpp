#include "ri/interface.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ri {

namespace {

constexpr std::int32_t kNone = -1;

// Dense view of B_m.
struct Grid {
  CuboidIndex idx;
  std::vector<Point> pts;
  std::vector<Coord> norm;

  Grid(int d, Coord m) : idx(ball(d, m).cuboid()) {
    pts.resize(idx.size());
    norm.resize(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      pts[k] = idx.point(k);
      norm[k] = linf_norm(pts[k]);
    }
  }
  std::size_t size() const { return pts.size(); }

  template <class F>
  void for_neighbors(std::size_t k, bool star, F&& f) const {
    for (const auto& q : neighbors(pts[k], star))
      if (idx.contains(q)) f(idx.index(q));
  }

  std::vector<std::uint8_t> mask(const PointSet& s) const {
    std::vector<std::uint8_t> out(size(), 0);
    for (const auto& p : s) out[idx.index(p)] = 1;
    return out;
  }
};

// Component labels of `open` (nearest-neighbour or star), ids in scan order.
std::vector<std::int32_t> label(const Grid& g, const std::vector<std::uint8_t>& open, bool star, int* count) {
  std::vector<std::int32_t> lab(g.size(), kNone);
  int n = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (!open[s] || lab[s] != kNone) continue;
    lab[s] = n;
    stack.push_back(s);
    while (!stack.empty()) {
      std::size_t k = stack.back();
      stack.pop_back();
      g.for_neighbors(k, star, [&](std::size_t q) {
        if (open[q] && lab[q] == kNone) {
          lab[q] = n;
          stack.push_back(q);
        }
      });
    }
    ++n;
  }
  if (count) *count = n;
  return lab;
}

// Shortest path inside `open` from {norm == from} to {norm == to}; empty if none.
std::vector<std::size_t> bfs_crossing(const Grid& g, const std::vector<std::uint8_t>& open, Coord from, Coord to,
                                      bool star) {
  std::vector<std::int64_t> parent(g.size(), -2);
  std::deque<std::size_t> q;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (open[k] && g.norm[k] == from) {
      parent[k] = -1;
      q.push_back(k);
    }
  }
  while (!q.empty()) {
    const std::size_t k = q.front();
    q.pop_front();
    if (g.norm[k] == to) {
      std::vector<std::size_t> path;
      for (std::int64_t c = static_cast<std::int64_t>(k); c >= 0; c = parent[static_cast<std::size_t>(c)])
        path.push_back(static_cast<std::size_t>(c));
      std::reverse(path.begin(), path.end());
      return path;
    }
    g.for_neighbors(k, star, [&](std::size_t nb) {
      if (open[nb] && parent[nb] == -2) {
        parent[nb] = static_cast<std::int64_t>(k);
        q.push_back(nb);
      }
    });
  }
  return {};
}

std::string dump(const std::vector<Point>& pts, std::size_t limit = 64) {
  std::ostringstream os;
  for (std::size_t i = 0; i < pts.size() && i < limit; ++i) os << (i ? " " : "") << pts[i].str();
  if (pts.size() > limit) os << " ... (" << pts.size() << " sites)";
  return os.str();
}

bool within_one(const Point& x, const PointSet& S) {
  if (S.contains(x)) return true;
  for (const auto& y : neighbors(x, true))
    if (S.contains(y)) return true;
  return false;
}

}  // namespace

InterfacePath interface_star_path(const PointSet& U, const PointSet& V, Coord n, Coord m) {
  if (!(m > n && n >= 1)) throw std::invalid_argument("interface_star_path: needs m > n >= 1");
  if (U.empty() || V.empty()) throw InterfaceError("interface_star_path: U and V must be non-empty", "");
  const int d = U.dim();
  check_dim(d);
  if (V.dim() != d) throw DimensionError("interface_star_path: U and V differ in dimension");
  const Grid g(d, m);

  for (const PointSet* S : {&U, &V}) {
    for (const auto& p : *S) {
      const Coord r = linf_norm(p);
      if (r < n || r > m)
        throw InterfaceError("interface_star_path: set leaves the annulus", p.str());
    }
  }
  const auto inU = g.mask(U), inV = g.mask(V);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.norm[k] >= n && !inU[k] && !inV[k])
      throw InterfaceError("interface_star_path: U and V do not cover the annulus", g.pts[k].str());

  // Crossing cluster of U: first in scan order, i.e. smallest minimal site.
  int nU = 0;
  const auto labU = label(g, inU, false, &nU);
  std::vector<std::uint8_t> hit_in(static_cast<std::size_t>(nU), 0), hit_out(hit_in.size(), 0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (labU[k] == kNone) continue;
    if (g.norm[k] == n) hit_in[labU[k]] = 1;
    if (g.norm[k] == m) hit_out[labU[k]] = 1;
  }
  int chosen = -1;
  for (int c = 0; c < nU && chosen < 0; ++c)
    if (hit_in[c] && hit_out[c]) chosen = c;
  if (chosen < 0) throw InterfaceError("interface_star_path: U has no crossing", "");

  const auto piV = bfs_crossing(g, inV, n, m, false);
  if (piV.empty()) throw InterfaceError("interface_star_path: V has no crossing", "");

  InterfacePath out;
  std::vector<std::uint8_t> inC(g.size(), 0), notC(g.size(), 0);
  std::vector<Point> cl;
  for (std::size_t k = 0; k < g.size(); ++k) {
    inC[k] = labU[k] == chosen;
    notC[k] = !inC[k];
    if (inC[k]) cl.push_back(g.pts[k]);
  }
  out.cluster = PointSet(std::move(cl));
  for (auto k : piV) out.v_crossing.push_back(g.pts[k]);
  out.start_in_cluster = inC[piV.front()];

  int nComp = 0;
  const auto labComp = label(g, notC, false, &nComp);

  // Union of the V-pieces inside the cluster and relative boundaries of the
  // complement components visited by the other pieces.
  std::vector<std::uint8_t> prime(g.size(), 0);
  std::set<int> used;
  bool prev_in = !inC[piV.front()];
  for (auto k : piV) {
    const bool in = inC[k];
    if (in != prev_in) ++out.n_segments;
    prev_in = in;
    if (in) prime[k] = 1;
    else used.insert(labComp[k]);
  }
  std::vector<std::vector<std::size_t>> rel(static_cast<std::size_t>(nComp));
  for (std::size_t k = 0; k < g.size(); ++k) {
    int last = kNone;
    g.for_neighbors(k, false, [&](std::size_t q) {
      const int j = labComp[q];
      if (j == kNone || j == labComp[k] || j == last || !used.count(j)) return;
      if (!rel[j].empty() && rel[j].back() == k) return;
      rel[j].push_back(k);
      last = j;
    });
  }
  std::vector<std::uint8_t> mark(g.size(), 0);
  for (int j : used) {
    for (auto k : rel[j]) mark[k] = 1, prime[k] = 1;
    int nrel = 0;
    label(g, mark, true, &nrel);
    if (nrel != 1) {
      std::vector<Point> w;
      for (auto k : rel[j]) w.push_back(g.pts[k]);
      throw InterfaceError("interface_star_path: relative boundary of a complement component is not *-connected",
                           dump(w));
    }
    for (auto k : rel[j]) mark[k] = 0;
  }

  std::vector<std::uint8_t> admissible(g.size(), 0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    bool nu = inU[k], nv = inV[k];
    g.for_neighbors(k, true, [&](std::size_t q) {
      nu = nu || inU[q];
      nv = nv || inV[q];
    });
    admissible[k] = nu && nv;
  }
  std::vector<std::uint8_t> pool(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) pool[k] = prime[k] && admissible[k];
  auto pi = bfs_crossing(g, pool, n, m, true);
  if (pi.empty()) {
    out.fallback = true;
    pi = bfs_crossing(g, admissible, n, m, true);
    if (pi.empty()) throw InterfaceError("interface_star_path: no admissible *-crossing", dump(out.v_crossing));
  }
  for (auto k : pi) out.path.push_back(g.pts[k]);
  return out;
}

PathCheck check_cond_path(const std::vector<Point>& path, const PointSet& U, const PointSet& V, Coord n, Coord m) {
  PathCheck r;
  auto fail = [&](std::string msg) {
    if (r.ok) r.message = std::move(msg);
    r.ok = false;
  };
  if (path.empty()) {
    fail("empty path");
    return r;
  }
  bool meets_n = false, meets_m = false;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const Point& x = path[i];
    const Coord nx = linf_norm(x);
    meets_n = meets_n || nx == n;
    meets_m = meets_m || nx == m;
    if (nx > m) fail("site outside B_m at " + std::to_string(i) + ": " + x.str());
    if (i > 0 && !star_adjacent(path[i - 1], x)) fail("not *-adjacent at " + std::to_string(i));
    if (!within_one(x, U)) fail("d(x, U) > 1 at " + x.str());
    if (!within_one(x, V)) fail("d(x, V) > 1 at " + x.str());
  }
  if (!meets_n) fail("path misses the inner sphere");
  if (!meets_m) fail("path misses the outer sphere");
  return r;
}

// ---- contact boxes ----

std::size_t contact_box_count(const ContactParams& p) {
  const Coord w = p.outer - p.inner;
  return static_cast<std::size_t>((w + 400 * p.N - 1) / (400 * p.N));
}

namespace {

Coord floor_div(Coord a, Coord b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
Coord ceil_div(Coord a, Coord b) { return -floor_div(-a, b); }

// Coarse sites c with B(10N c, 10N) meeting S.
PointSet coarse_grain(const PointSet& S, Coord N) {
  const Coord h = 10 * N;
  std::vector<Point> out;
  for (const auto& p : S) {
    std::array<Coord, kMaxDim> lo{}, hi{};
    for (int a = 0; a < p.d; ++a) {
      lo[a] = ceil_div(p.x[a] - h, h);
      hi[a] = floor_div(p.x[a] + h, h);
    }
    Point c(p.d);
    for (int a = 0; a < p.d; ++a) c.x[a] = lo[a];
    while (true) {
      out.push_back(c);
      int a = p.d - 1;
      while (a >= 0 && c.x[a] == hi[a]) {
        c.x[a] = lo[a];
        --a;
      }
      if (a < 0) break;
      ++c.x[a];
    }
  }
  return PointSet(std::move(out));
}

}  // namespace

ContactBoxes contact_boxes(const PointSet& S1, const PointSet& S2, const ContactParams& p) {
  if (p.N < 1 || p.inner < 0 || p.outer <= p.inner)
    throw std::invalid_argument("contact_boxes: needs N >= 1 and 0 <= inner < outer");
  if (S1.empty() || S2.empty()) throw InterfaceError("contact_boxes: S1 and S2 must be non-empty", "");
  const int d = S1.dim();
  const Coord h = 10 * p.N;
  // Coarse annulus: sites whose 25N-box fits inside the fine annulus.
  const Coord n = ceil_div(p.inner + 25 * p.N + 1, h);
  const Coord m = floor_div(p.outer - 25 * p.N, h);
  if (!(m > n && n >= 1))
    throw InterfaceError("contact_boxes: annulus too thin for the coarse scale",
                         "coarse radii " + std::to_string(n) + ".." + std::to_string(m));
  auto restrict = [&](const PointSet& s) {
    std::vector<Point> v;
    for (const auto& c : s) {
      const Coord r = linf_norm(c);
      if (r >= n && r <= m) v.push_back(c);
    }
    return PointSet(std::move(v));
  };
  const PointSet U = restrict(coarse_grain(S1, p.N));
  const PointSet V = restrict(coarse_grain(S2, p.N));
  const InterfacePath ip = interface_star_path(U, V, n, m);

  ContactBoxes out;
  out.params = p;
  out.K = contact_box_count(p);
  out.radius = 20 * p.N;
  out.coarse_path = ip.path;

  // Depth-first choice of K path sites: norms increase by >= 10 (pairwise
  // separation) and consecutive sites lie within 20 coarse units.
  const auto& pi = ip.path;
  std::vector<std::size_t> order(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return linf_norm(pi[a]) < linf_norm(pi[b]); });
  std::vector<std::size_t> chosen;
  std::size_t budget = 200000;
  std::function<bool()> extend = [&]() -> bool {
    if (chosen.size() == out.K) return true;
    if (budget-- == 0) return false;
    const Point& last = pi[chosen.back()];
    const Coord base = linf_norm(last);
    for (std::size_t i : order) {
      const Point& c = pi[i];
      if (linf_norm(c) < base + 10 || linf_dist(c, last) > 20) continue;
      chosen.push_back(i);
      if (extend()) return true;
      chosen.pop_back();
    }
    return false;
  };
  bool found = false;
  for (std::size_t i : order) {
    chosen.assign(1, i);
    if (extend()) {
      found = true;
      break;
    }
    if (budget == 0) break;
  }
  if (!found) throw InterfaceError("contact_boxes: no admissible box family along the interface path", dump(pi));
  for (std::size_t i : chosen) {
    Point x(d);
    for (int a = 0; a < d; ++a) x.x[a] = pi[i].x[a] * h;
    out.centers.push_back(x);
  }
  return out;
}

ContactCheck check_contact_boxes(const ContactBoxes& b, const PointSet& S1, const PointSet& S2) {
  ContactCheck r;
  auto note = [&](const std::string& s) {
    if (r.message.empty()) r.message = s;
  };
  const Coord N = b.params.N;
  if (b.centers.size() != contact_box_count(b.params)) {
    r.count = false;
    note("box count " + std::to_string(b.centers.size()));
  }
  auto meets = [](const PointSet& S, const Box& B) {
    for (const auto& p : S)
      if (B.contains(p)) return true;
    return false;
  };
  for (std::size_t k = 0; k < b.centers.size(); ++k) {
    const Point& x = b.centers[k];
    for (int a = 0; a < x.d; ++a)
      if (x.x[a] % (10 * N) != 0) {
        r.on_grid = false;
        note("off-grid centre " + x.str());
      }
    const Box L(x, 20 * N);
    if (!meets(S1, L) || !meets(S2, L)) {
      r.meets_both = false;
      note("box " + std::to_string(k) + " misses S1 or S2");
    }
    // B(x,25N) inside {inner < |y| <= outer}: the nearest point to the
    // origin has norm max(0, max_a |x_a| - 25N); the farthest |x| + 25N.
    const Coord nx = linf_norm(x);
    if (nx + 25 * N > b.params.outer || nx - 25 * N <= b.params.inner) {
      r.inside = false;
      note("box " + std::to_string(k) + " leaves the annulus");
    }
    if (k + 1 < b.centers.size() && linf_dist(x, b.centers[k + 1]) > 200 * N) {
      r.consecutive = false;
      note("consecutive centres too far at " + std::to_string(k));
    }
    for (std::size_t j = k + 1; j < b.centers.size(); ++j)
      if (linf_dist(x, b.centers[j]) < 100 * N) {
        r.separated = false;
        note("centres too close: " + std::to_string(k) + "," + std::to_string(j));
      }
  }
  return r;
}

void write_path_json(std::ostream& os, const InterfacePath& p) {
  nlohmann::json j;
  j["path"] = nlohmann::json::array();
  for (const auto& x : p.path) j["path"].push_back(x.to_vector());
  j["start_in_cluster"] = p.start_in_cluster;
  j["segments"] = p.n_segments;
  j["fallback"] = p.fallback;
  os << j.dump() << '\n';
}

void write_contact_json(std::ostream& os, const ContactBoxes& b) {
  nlohmann::json j;
  j["N"] = b.params.N;
  j["inner"] = b.params.inner;
  j["outer"] = b.params.outer;
  j["K"] = b.K;
  j["boxes"] = nlohmann::json::array();
  for (const auto& c : b.centers) j["boxes"].push_back({{"center", c.to_vector()}, {"radius", b.radius}});
  os << j.dump() << '\n';
}

}  // namespace ri
