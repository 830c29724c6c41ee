#include "ri/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace ri {

// ---- generic decomposition ----

namespace {
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};
}  // namespace

ClusterDecomposition decompose(const PointSet& vacant, const PointSet& domain) {
  if (!is_subset(vacant, domain)) throw std::invalid_argument("decompose: vacant set must lie inside the domain");
  ClusterDecomposition cd;
  cd.domain = domain;
  cd.vacant = vacant;
  const std::size_t n = vacant.size();
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& x = vacant[i];
    for (int a = 0; a < x.d; ++a) {
      Point y = x;
      ++y.x[a];
      auto j = vacant.index_of(y);
      if (j >= 0) uf.unite(static_cast<int>(i), static_cast<int>(j));
    }
  }
  const PointSet inner = boundary(domain);
  std::vector<int> root_to_id(n, -1);
  cd.component.resize(n);
  std::vector<Cuboid> ext;
  for (std::size_t i = 0; i < n; ++i) {
    int r = uf.find(static_cast<int>(i));
    if (root_to_id[r] < 0) {
      root_to_id[r] = static_cast<int>(cd.sizes.size());
      cd.sizes.push_back(0);
      cd.touches_boundary.push_back(0);
      ext.push_back({vacant[i], vacant[i]});
    }
    const int id = root_to_id[r];
    cd.component[i] = id;
    ++cd.sizes[id];
    for (int a = 0; a < vacant[i].d; ++a) {
      ext[id].lo.x[a] = std::min(ext[id].lo.x[a], vacant[i].x[a]);
      ext[id].hi.x[a] = std::max(ext[id].hi.x[a], vacant[i].x[a]);
    }
    if (inner.contains(vacant[i])) cd.touches_boundary[id] = 1;
  }
  for (const auto& c : ext) {
    Coord m = 0;
    for (int a = 0; a < c.lo.d; ++a) m = std::max(m, c.hi.x[a] - c.lo.x[a]);
    cd.diameters.push_back(m);
  }
  return cd;
}

// ---- level field ----

LevelField::LevelField(Box box, std::vector<double> first_label)
    : box_(std::move(box)), idx_(box_.cuboid()), first_(std::move(first_label)) {
  if (first_.size() != idx_.size()) throw std::invalid_argument("LevelField: label vector size mismatch");
}

LevelField LevelField::from_sample(const InterlacementSample& s) {
  if (!s.window->is_box()) throw std::invalid_argument("LevelField::from_sample: window must be a box");
  // Box windows list sites in row-major cuboid order.
  return LevelField(s.window->as_box(), s.first_label);
}

namespace {

/// Sub-box B(center, r) of a field, with per-site field indices.
struct SubGrid {
  int d = 0;
  Coord r = 0;
  std::array<Coord, kMaxDim> ext{};
  std::array<std::size_t, kMaxDim> stride{};
  std::size_t n = 0;
  std::vector<std::size_t> field;

  SubGrid(const LevelField& f, Coord radius) : d(f.dim()), r(radius) {
    if (!f.covers(radius))
      throw std::invalid_argument("detector needs B_" + std::to_string(radius) + " inside the field box of radius " +
                                  std::to_string(f.box().radius));
    const Coord off = f.box().radius - radius;
    std::size_t s = 1;
    for (int a = d - 1; a >= 0; --a) {
      ext[a] = 2 * radius + 1;
      stride[a] = s;
      s *= static_cast<std::size_t>(ext[a]);
    }
    n = s;
    field.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t fk = 0;
      for (int a = 0; a < d; ++a) {
        Coord o = static_cast<Coord>((k / stride[a]) % static_cast<std::size_t>(ext[a]));
        fk += static_cast<std::size_t>(o + off) * f.index().stride(a);
      }
      field[k] = fk;
    }
  }
  Coord coord(std::size_t k, int a) const {
    return static_cast<Coord>((k / stride[a]) % static_cast<std::size_t>(ext[a])) - r;
  }
  Coord depth(std::size_t k) const {
    Coord m = 0;
    for (int a = 0; a < d; ++a) m = std::max(m, std::abs(coord(k, a)));
    return m;
  }
};

struct Labels {
  std::vector<int> label;  // -1 closed
  int count = 0;
};

Labels components(const SubGrid& g, const std::vector<std::uint8_t>& open) {
  Labels L;
  L.label.assign(g.n, -1);
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < g.n; ++s) {
    if (!open[s] || L.label[s] >= 0) continue;
    const int id = L.count++;
    L.label[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      for (int a = 0; a < g.d; ++a) {
        const Coord o = static_cast<Coord>((k / g.stride[a]) % static_cast<std::size_t>(g.ext[a]));
        if (o > 0) {
          std::size_t q = k - g.stride[a];
          if (open[q] && L.label[q] < 0) {
            L.label[q] = id;
            stack.push_back(q);
          }
        }
        if (o + 1 < g.ext[a]) {
          std::size_t q = k + g.stride[a];
          if (open[q] && L.label[q] < 0) {
            L.label[q] = id;
            stack.push_back(q);
          }
        }
      }
    }
  }
  return L;
}

std::vector<std::uint8_t> level_mask(const LevelField& f, const SubGrid& g, double u) {
  std::vector<std::uint8_t> m(g.n);
  for (std::size_t k = 0; k < g.n; ++k) m[k] = f.vacant(g.field[k], u) ? 1 : 0;
  return m;
}

std::vector<Coord> diameters(const SubGrid& g, const Labels& L) {
  std::vector<std::array<Coord, kMaxDim>> lo(static_cast<std::size_t>(L.count)), hi(lo.size());
  for (auto& v : lo) v.fill(std::numeric_limits<Coord>::max());
  for (auto& v : hi) v.fill(std::numeric_limits<Coord>::min());
  for (std::size_t k = 0; k < g.n; ++k) {
    const int id = L.label[k];
    if (id < 0) continue;
    for (int a = 0; a < g.d; ++a) {
      const Coord c = g.coord(k, a);
      lo[id][a] = std::min(lo[id][a], c);
      hi[id][a] = std::max(hi[id][a], c);
    }
  }
  std::vector<Coord> out(lo.size(), 0);
  for (std::size_t i = 0; i < lo.size(); ++i)
    for (int a = 0; a < g.d; ++a) out[i] = std::max(out[i], hi[i][a] - lo[i][a]);
  return out;
}

}  // namespace

bool detect_exist(const LevelField& f, Coord r, double u) {
  SubGrid g(f, r);
  Labels L = components(g, level_mask(f, g, u));
  for (Coord diam : diameters(g, L))
    if (5 * diam >= r) return true;
  return false;
}

bool detect_unique(const LevelField& f, Coord r, double u, double v) {
  if (!(v < u)) throw std::invalid_argument("detect_unique: needs v < u");
  SubGrid g(f, r);
  Labels L = components(g, level_mask(f, g, u));
  std::vector<Coord> diam = diameters(g, L);
  std::vector<std::size_t> rep(diam.size(), g.n);
  for (std::size_t k = 0; k < g.n; ++k)
    if (L.label[k] >= 0 && rep[L.label[k]] == g.n) rep[L.label[k]] = k;

  SubGrid g2(f, 2 * r);
  Labels L2 = components(g2, level_mask(f, g2, v));
  const Coord shift = r;  // offset of B_r inside B_{2r}
  int common = -1;
  for (std::size_t c = 0; c < diam.size(); ++c) {
    if (10 * diam[c] < r) continue;
    std::size_t k2 = 0;
    for (int a = 0; a < g.d; ++a) k2 += static_cast<std::size_t>(g.coord(rep[c], a) + r + shift) * g2.stride[a];
    const int id = L2.label[k2];
    if (id < 0) throw std::logic_error("detect_unique: V^u site closed at the sprinkled level");
    if (common < 0) common = id;
    else if (common != id) return false;
  }
  return true;
}

bool detect_uc(const LevelField& f, Coord M, double u, double v) {
  if (!(v < u)) throw std::invalid_argument("detect_uc: needs v < u");
  if (M < 1) throw std::invalid_argument("detect_uc: M must be >= 1");
  {
    SubGrid g(f, 6 * M);
    Labels L = components(g, level_mask(f, g, u));
    std::vector<std::uint8_t> inner(static_cast<std::size_t>(L.count), 0), outer(inner.size(), 0);
    for (std::size_t k = 0; k < g.n; ++k) {
      const int id = L.label[k];
      if (id < 0) continue;
      const Coord dep = g.depth(k);
      if (dep <= M) inner[id] = 1;
      if (dep == 6 * M) outer[id] = 1;
    }
    bool crossing = false;
    for (std::size_t c = 0; c < inner.size(); ++c) crossing = crossing || (inner[c] && outer[c]);
    if (!crossing) return false;
  }
  SubGrid g(f, 4 * M);
  Labels Lu = components(g, level_mask(f, g, u));
  Labels Lv = components(g, level_mask(f, g, v));
  std::vector<std::uint8_t> inner(static_cast<std::size_t>(Lu.count), 0), outer(inner.size(), 0);
  std::vector<int> vid(inner.size(), -1);
  for (std::size_t k = 0; k < g.n; ++k) {
    const int id = Lu.label[k];
    if (id < 0) continue;
    const Coord dep = g.depth(k);
    if (dep <= 2 * M) inner[id] = 1;
    if (dep == 4 * M) outer[id] = 1;
    vid[id] = Lv.label[k];
  }
  int common = -1;
  for (std::size_t c = 0; c < inner.size(); ++c) {
    if (!(inner[c] && outer[c])) continue;
    if (common < 0) common = vid[c];
    else if (common != vid[c]) return false;
  }
  return true;
}

bool detect_disconnect(const LevelField& f, Coord r, Coord M, double u) {
  if (r > M) throw std::invalid_argument("detect_disconnect: needs r <= M");
  SubGrid g(f, M);
  Labels L = components(g, level_mask(f, g, u));
  std::vector<std::uint8_t> inner(static_cast<std::size_t>(L.count), 0), outer(inner.size(), 0);
  for (std::size_t k = 0; k < g.n; ++k) {
    const int id = L.label[k];
    if (id < 0) continue;
    const Coord dep = g.depth(k);
    if (dep <= r) inner[id] = 1;
    if (dep == M) outer[id] = 1;
  }
  for (std::size_t c = 0; c < inner.size(); ++c)
    if (inner[c] && outer[c]) return false;
  return true;
}

// ---- class counts ----

Coord class_box_radius(Coord M, int k) {
  const double rad = 4.0 * static_cast<double>(M) - k * std::sqrt(static_cast<double>(M));
  return static_cast<Coord>(std::floor(rad + 1e-12));
}

ClassCounts class_counts(const LevelField& f, Coord M, int j, double u, double delta) {
  if (M < 1) throw std::invalid_argument("class_counts: M must be >= 1");
  if (!(delta >= 0.0) || delta > u) throw std::invalid_argument("class_counts: need 0 <= delta <= u");
  ClassCounts out;
  out.M = M;
  out.j = j;
  out.imax = static_cast<int>(std::floor(std::sqrt(static_cast<double>(M)) + 1e-12));
  if (j < 0 || j > out.imax) throw std::invalid_argument("class_counts: j outside [0, floor(sqrt M)]");
  for (int k = 0; k <= 2 * out.imax; ++k) {
    out.v_radius.push_back(class_box_radius(M, k));
    if (out.v_radius.back() < 0) throw std::invalid_argument("class_counts: degenerate V_" + std::to_string(k));
  }

  // Ground clusters: V^u in B_{4M} meeting its boundary.
  SubGrid g4(f, 4 * M);
  Labels Lu = components(g4, level_mask(f, g4, u));
  std::vector<std::uint8_t> outer(static_cast<std::size_t>(Lu.count), 0);
  std::vector<Coord> depth(outer.size(), std::numeric_limits<Coord>::max());
  std::vector<std::size_t> rep(outer.size(), 0);
  for (std::size_t k = 0; k < g4.n; ++k) {
    const int id = Lu.label[k];
    if (id < 0) continue;
    const Coord dep = g4.depth(k);
    if (dep == 4 * M) outer[id] = 1;
    if (dep < depth[id]) depth[id] = dep;
    rep[id] = k;
  }
  std::vector<int> cluster_of(outer.size(), -1);
  std::vector<Coord> cdepth;
  std::vector<std::size_t> crep;
  for (std::size_t c = 0; c < outer.size(); ++c) {
    if (!outer[c]) continue;
    cluster_of[c] = static_cast<int>(cdepth.size());
    cdepth.push_back(depth[c]);
    crep.push_back(rep[c]);
  }
  out.n_clusters = cdepth.size();

  SubGrid gf(f, f.box().radius);
  const Coord off = f.box().radius - 4 * M;
  auto eta_classes = [&](int stage) {
    const Coord inner = out.v_radius[static_cast<std::size_t>(2 * stage)];
    std::vector<std::uint8_t> open(gf.n);
    for (std::size_t k = 0; k < gf.n; ++k) {
      const double lvl = gf.depth(k) <= inner ? u : u - delta;
      open[k] = f.vacant(gf.field[k], lvl) ? 1 : 0;
    }
    Labels L = components(gf, open);
    std::vector<int> cls(cdepth.size());
    for (std::size_t c = 0; c < cdepth.size(); ++c) {
      std::size_t kf = 0;
      for (int a = 0; a < gf.d; ++a) kf += static_cast<std::size_t>(g4.coord(crep[c], a) + 4 * M + off) * gf.stride[a];
      cls[c] = L.label[kf];
      if (cls[c] < 0) throw std::logic_error("class_counts: cluster site closed in eta");
    }
    return cls;
  };
  // Minimum depth over the clusters of each class.
  auto class_depths = [&](const std::vector<int>& cls) {
    std::vector<std::pair<int, Coord>> v;
    std::vector<int> ids(cls.begin(), cls.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (int id : ids) {
      Coord m = std::numeric_limits<Coord>::max();
      for (std::size_t c = 0; c < cls.size(); ++c)
        if (cls[c] == id) m = std::min(m, cdepth[c]);
      v.emplace_back(id, m);
    }
    return v;
  };
  auto count_U = [&](const std::vector<std::pair<int, Coord>>& cd, int i) {
    std::size_t n = 0;
    for (const auto& [id, dep] : cd) n += dep <= out.v_radius[static_cast<std::size_t>(2 * i)] ? 1 : 0;
    return n;
  };
  auto count_straddle = [&](const std::vector<std::pair<int, Coord>>& cd, int i, int half) {
    // classes meeting V_{2i+half} but not V_{2i+2}
    std::size_t n = 0;
    const Coord a = out.v_radius[static_cast<std::size_t>(2 * i + half)];
    const Coord b = out.v_radius[static_cast<std::size_t>(2 * i + 2)];
    for (const auto& [id, dep] : cd) n += (dep <= a && dep > b) ? 1 : 0;
    return n;
  };

  const std::vector<int> cls_j = eta_classes(j);
  const auto cd_j = class_depths(cls_j);
  for (int i = 0; i <= out.imax; ++i) out.U_eta.push_back(count_U(cd_j, i));
  for (int i = 0; i < out.imax; ++i) {
    out.U_step.push_back(count_straddle(cd_j, i, 0));
    out.U_half.push_back(count_straddle(cd_j, i, 1));
  }
  for (int i = 0; i <= out.imax; ++i) {
    const auto cd_i = i == j ? cd_j : class_depths(eta_classes(i));
    out.U_diag.push_back(count_U(cd_i, i));
  }
  if (j < out.imax) {
    const Coord rj = out.v_radius[static_cast<std::size_t>(2 * j)];
    const Coord rj1 = out.v_radius[static_cast<std::size_t>(2 * j + 2)];
    const Coord rjh = out.v_radius[static_cast<std::size_t>(2 * j + 1)];
    std::vector<std::size_t> merged;
    bool half_nonempty = false;
    for (const auto& [id, dep] : cd_j) {
      if (dep > rj) continue;
      std::vector<std::size_t> members;
      for (std::size_t c = 0; c < cls_j.size(); ++c)
        if (cls_j[c] == id && cdepth[c] <= rj) members.push_back(c);
      if (dep > rj1) {
        merged.insert(merged.end(), members.begin(), members.end());
        half_nonempty = half_nonempty || dep <= rjh;
      } else {
        out.tilde.push_back(members);
      }
    }
    if (half_nonempty) {
      std::sort(merged.begin(), merged.end());
      out.tilde.push_back(merged);
    }
  }
  return out;
}

Coord m_of_r(double r, double gamma, bool* overflow) {
  if (!(r >= 1.0) || !(gamma > 1.0)) throw std::invalid_argument("m_of_r: needs r >= 1 and gamma > 1");
  const double lg = std::pow(std::log(r), gamma);
  const bool of = lg > std::log(0x1p62);
  if (overflow) *overflow = of;
  if (of) return static_cast<Coord>(0x1p62);
  return static_cast<Coord>(std::floor(std::exp(lg) + 1e-9));
}

}  // namespace ri
