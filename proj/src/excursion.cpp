#include "ri/excursion.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>

#include "ri/clusters.hpp"

namespace ri {

namespace {

// Dense membership over the bounding cuboid of U: 0 outside U, 1 in U \ A,
// 2 in A \ B, 3 in B.
class Zones {
 public:
  Zones(const PointSet& A, const PointSet& U, const PointSet* B = nullptr) {
    if (U.empty()) return;
    idx_ = CuboidIndex(U.bbox());
    code_.assign(idx_.size(), 0);
    for (const auto& p : U) code_[idx_.index(p)] = 1;
    for (const auto& p : A) {
      if (!idx_.contains(p) || !code_[idx_.index(p)]) throw std::invalid_argument("excursions: A must lie inside U");
      code_[idx_.index(p)] = 2;
    }
    if (B) {
      for (const auto& p : *B) {
        if (!idx_.contains(p) || code_[idx_.index(p)] != 2) throw std::invalid_argument("excursions: B must lie inside A");
        code_[idx_.index(p)] = 3;
      }
    }
  }
  int operator()(const Point& p) const { return idx_.size() && idx_.contains(p) ? code_[idx_.index(p)] : 0; }

 private:
  CuboidIndex idx_;
  std::vector<std::uint8_t> code_;
};

std::vector<Excursion> decompose(const std::vector<Point>& path, const Zones& z) {
  std::vector<Excursion> out;
  std::size_t t = 0;
  const std::size_t n = path.size();
  while (true) {
    while (t < n && z(path[t]) < 2) ++t;
    if (t == n) break;
    Excursion e;
    e.start = t;
    while (t < n && z(path[t]) > 0) ++t;
    if (t == n) {
      e.end = n - 1;
      e.exit_seen = false;
      out.push_back(e);
      break;
    }
    e.end = t;
    out.push_back(e);
  }
  return out;
}

void require_full(const InterlacementSample& s, const PointSet& A) {
  if (s.mode != PathMode::kFull) throw std::invalid_argument("excursions need a full-mode sample");
  for (const auto& p : A)
    if (s.window->index_of(p) < 0) throw std::invalid_argument("excursions: A leaves the sample window at " + p.str());
}

}  // namespace

std::vector<Excursion> decompose_excursions(const std::vector<Point>& path, const PointSet& A, const PointSet& U) {
  return decompose(path, Zones(A, U));
}

bool clothesline_less(const ClotheslineRecord& a, const ClotheslineRecord& b) {
  return std::tie(a.label, a.traj, a.k) < std::tie(b.label, b.traj, b.k);
}

Clothesline build_clothesline(const InterlacementSample& s, const PointSet& A, const PointSet& U) {
  require_full(s, A);
  const Zones z(A, U);
  Clothesline c;
  for (std::size_t i = 0; i < s.trajectories.size(); ++i) {
    const auto& t = s.trajectories[i];
    const auto path = t.two_sided();
    std::size_t k = 0;
    for (const auto& e : decompose(path, z)) {
      ++k;
      if (!e.exit_seen) {
        ++c.pending;
        continue;
      }
      c.records.push_back({path[e.start], path[e.end], t.label, i, k});
    }
  }
  std::stable_sort(c.records.begin(), c.records.end(), clothesline_less);
  return c;
}

std::vector<ClotheslineRecord> Clothesline::sequence(double u) const {
  std::vector<ClotheslineRecord> out;
  for (const auto& r : records)
    if (r.label <= u) out.push_back(r);
  return out;
}

std::vector<std::pair<Point, Point>> Clothesline::multiset(double u) const {
  std::vector<std::pair<Point, Point>> out;
  for (const auto& r : records)
    if (r.label <= u) out.emplace_back(r.entry, r.exit);
  std::sort(out.begin(), out.end());
  return out;
}

InnerView restrict_to_inner(const InterlacementSample& s, const PointSet& B, const PointSet& A, const PointSet& U,
                            double u) {
  require_full(s, A);
  const Zones z(A, U, &B);
  InnerView v;
  std::vector<Point> hit;
  for (std::size_t i = 0; i < s.trajectories.size(); ++i) {
    const auto& t = s.trajectories[i];
    if (t.label > u) break;
    const auto path = t.two_sided();
    std::size_t k = 0;
    for (const auto& e : decompose(path, z)) {
      ++k;
      if (!e.exit_seen) {
        ++v.pending;
        continue;
      }
      InnerRecord r;
      r.traj = i;
      r.k = k;
      r.label = t.label;
      std::size_t first = e.end, last = e.start;
      for (std::size_t j = e.start; j < e.end; ++j) {
        const int c = z(path[j]);
        if (c == 3 && first == e.end) first = j;
        if (c >= 2) last = j;
      }
      if (first != e.end) {
        r.cemetery = false;
        r.path.assign(path.begin() + static_cast<std::ptrdiff_t>(first),
                      path.begin() + static_cast<std::ptrdiff_t>(last) + 1);
        for (const auto& p : r.path)
          if (z(p) == 3) hit.push_back(p);
      }
      v.records.push_back(std::move(r));
    }
  }
  v.range_in_B = PointSet(std::move(hit));
  return v;
}

PointSet occupied_in(const InterlacementSample& s, const PointSet& B, double u) {
  std::vector<Point> out;
  for (const auto& p : B) {
    const auto k = s.window->index_of(p);
    if (k < 0) throw std::invalid_argument("occupied_in: B leaves the window at " + p.str());
    if (s.first_label[static_cast<std::size_t>(k)] <= u) out.push_back(p);
  }
  return PointSet(std::move(out));
}

double rounded_box_b(int d) { return 0.5 * (1.0 + (4.0 * d - 4.0) / (3.0 * d - 2.0)); }

RoundedBoxes rounded_boxes(int d, Coord r, double exponent) {
  check_dim(d);
  if (r < 1) throw std::invalid_argument("rounded_boxes: r must be >= 1");
  RoundedBoxes out;
  out.b = rounded_box_b(d);
  out.s = std::pow(static_cast<double>(r), exponent > 0 ? exponent : 1.0 / out.b);
  // Distance from z to the lattice cube B_R is attained at the coordinatewise clamp.
  auto build = [&](double reach) {
    const Coord R = static_cast<Coord>(std::floor(static_cast<double>(r) + reach));
    const Coord outer = R + static_cast<Coord>(std::floor(out.s));
    std::vector<Point> pts;
    for (const auto& p : ball(d, outer).cuboid().points()) {
      double q = 0;
      for (int a = 0; a < d; ++a) {
        const double e = static_cast<double>(std::max<Coord>(0, std::abs(p.x[a]) - R));
        q += e * e;
      }
      if (q <= out.s * out.s) pts.push_back(p);
    }
    return PointSet(std::move(pts));
  };
  out.A = build(out.s);
  out.U = build(2 * out.s);
  return out;
}

// ---- finite-energy events ----

namespace {

PointSet annulus(const Box& B, Coord outer, Coord inner) {
  std::vector<Point> pts;
  const Box o(B.center, B.radius + outer);
  const Box i(B.center, B.radius + inner);
  for (const auto& p : o.cuboid().points())
    if (!i.contains(p)) pts.push_back(p);
  return PointSet(std::move(pts));
}

}  // namespace

PointSet inner_annulus(const Box& B, Coord r0) { return annulus(B, 5 * r0, 3 * r0); }
PointSet outer_annulus(const Box& B, Coord r0) { return annulus(B, 6 * r0, 2 * r0); }
Box hat_box(const Box& B, Coord r0) { return Box(B.center, B.radius + 7 * r0); }

FiniteEnergyResult detect_finite_energy_good(const InterlacementSample& s, const Box& B, Coord r0,
                                             const FiniteEnergyLevels& lv) {
  if (r0 < 1) throw std::invalid_argument("finite energy: r0 must be >= 1");
  if (!(lv.u1 >= lv.u2 && lv.u2 >= lv.u3 && lv.u3 > lv.delta2 && lv.delta2 > lv.delta1 && lv.delta1 > 0))
    throw std::invalid_argument("finite energy: needs u1 >= u2 >= u3 > delta2 > delta1 > 0");
  if (lv.u1 > s.u_max) throw std::invalid_argument("finite energy: level above u_max");
  const Box big(B.center, B.radius + 8 * r0);
  const auto& W = *s.window;
  for (const auto& corner : {big.cuboid().lo, big.cuboid().hi})
    if (W.index_of(corner) < 0) throw WindowTooSmall("finite energy: window does not contain B(x, r + 8 r0)");
  // Box windows are convex, so the two corners suffice; general windows are checked site by site.
  if (!W.is_box())
    for (const auto& p : big.cuboid().points())
      if (W.index_of(p) < 0) throw WindowTooSmall("finite energy: window does not contain B(x, r + 8 r0)");

  auto label_of = [&](const Point& p) { return s.first_label[static_cast<std::size_t>(W.index_of(p))]; };
  FiniteEnergyResult r;

  const PointSet wide = outer_annulus(B, r0);
  std::vector<Point> occ;
  for (const auto& p : wide)
    if (label_of(p) <= lv.u2) occ.push_back(p);
  const PointSet occupied(std::move(occ));
  const ClusterDecomposition cd = decompose(occupied, wide);
  int comp = -1;
  r.f1 = true;
  for (const auto& p : inner_annulus(B, r0)) {
    if (!(label_of(p) <= lv.u2 - lv.delta1)) continue;
    const int c = cd.component[static_cast<std::size_t>(occupied.index_of(p))];
    if (comp < 0) comp = c;
    if (c != comp) {
      r.f1 = false;
      break;
    }
  }

  r.f2 = false;
  const Box near(B.center, B.radius + r0);
  for (const auto& p : near.cuboid().points()) {
    const double l = label_of(p);
    if (l <= lv.u3 - lv.delta1 && l > lv.u3 - lv.delta2) {
      r.f2 = true;
      break;
    }
  }

  r.f3 = true;
  const auto occ_u1 = s.occupation_at_level(lv.u1);
  for (const auto& p : big.cuboid().points())
    if (occ_u1[static_cast<std::size_t>(W.index_of(p))] > static_cast<std::uint64_t>(r0)) {
      r.f3 = false;
      break;
    }
  return r;
}

void write_clothesline_csv(std::ostream& os, const Clothesline& c, int d) {
  os << "traj_id,k";
  for (int a = 1; a <= d; ++a) os << ",entry_" << a;
  for (int a = 1; a <= d; ++a) os << ",exit_" << a;
  os << ",label\n";
  const auto prec = os.precision(17);
  for (const auto& r : c.records) {
    os << r.traj << ',' << r.k;
    for (int a = 0; a < d; ++a) os << ',' << r.entry.x[a];
    for (int a = 0; a < d; ++a) os << ',' << r.exit.x[a];
    os << ',' << r.label << '\n';
  }
  os.precision(prec);
}

}  // namespace ri
