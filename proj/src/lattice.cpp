#include "ri/lattice.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace ri {

void check_dim(int d) {
  if (d < 3 || d > kMaxDim)
    throw DimensionError("dimension must lie in [3, " + std::to_string(kMaxDim) + "], got " +
                         std::to_string(d));
}

Point::Point(int dim) : d(dim) { check_dim(dim); }

Point::Point(std::initializer_list<Coord> coords) : d(static_cast<int>(coords.size())) {
  check_dim(d);
  std::copy(coords.begin(), coords.end(), x.begin());
}

Point Point::from_vector(const std::vector<Coord>& coords) {
  Point p;
  p.d = static_cast<int>(coords.size());
  check_dim(p.d);
  std::copy(coords.begin(), coords.end(), p.x.begin());
  return p;
}

std::vector<Coord> Point::to_vector() const { return {x.begin(), x.begin() + d}; }

std::string Point::str() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < d; ++i) os << (i ? "," : "") << x[i];
  os << ')';
  return os.str();
}

std::size_t PointHash::operator()(const Point& p) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(p.d);
  for (int i = 0; i < p.d; ++i) {
    h ^= static_cast<std::uint64_t>(p.x[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

void require_same_dim(const Point& a, const Point& b) {
  if (a.d != b.d)
    throw DimensionError("mixed dimensions " + std::to_string(a.d) + " and " + std::to_string(b.d));
}

Point operator+(const Point& a, const Point& b) {
  require_same_dim(a, b);
  Point r = a;
  for (int i = 0; i < a.d; ++i) r.x[i] += b.x[i];
  return r;
}

Point operator-(const Point& a, const Point& b) {
  require_same_dim(a, b);
  Point r = a;
  for (int i = 0; i < a.d; ++i) r.x[i] -= b.x[i];
  return r;
}

Point unit_vector(int d, int axis, int sign) {
  Point p(d);
  p.x[axis] = sign;
  return p;
}

Coord linf_norm(const Point& p) {
  Coord m = 0;
  for (int i = 0; i < p.d; ++i) m = std::max(m, p.x[i] < 0 ? -p.x[i] : p.x[i]);
  return m;
}

Coord l1_norm(const Point& p) {
  Coord s = 0;
  for (int i = 0; i < p.d; ++i) s += p.x[i] < 0 ? -p.x[i] : p.x[i];
  return s;
}

Coord linf_dist(const Point& a, const Point& b) { return linf_norm(a - b); }
bool adjacent(const Point& a, const Point& b) { return l1_norm(a - b) == 1; }
bool star_adjacent(const Point& a, const Point& b) { return linf_norm(a - b) == 1; }

std::vector<Point> neighbors(const Point& p, bool star) {
  std::vector<Point> out;
  if (!star) {
    out.reserve(static_cast<std::size_t>(2 * p.d));
    for (int i = 0; i < p.d; ++i) {
      for (int s : {-1, 1}) {
        Point q = p;
        q.x[i] += s;
        out.push_back(q);
      }
    }
    return out;
  }
  int total = 1;
  for (int i = 0; i < p.d; ++i) total *= 3;
  out.reserve(static_cast<std::size_t>(total - 1));
  for (int code = 0; code < total; ++code) {
    Point q = p;
    int c = code;
    bool zero = true;
    for (int i = 0; i < p.d; ++i) {
      int off = c % 3 - 1;
      c /= 3;
      q.x[i] += off;
      zero = zero && off == 0;
    }
    if (!zero) out.push_back(q);
  }
  return out;
}

// ---- Cuboid ----

bool Cuboid::empty() const {
  for (int i = 0; i < lo.d; ++i)
    if (lo.x[i] > hi.x[i]) return true;
  return lo.d == 0;
}

bool Cuboid::contains(const Point& p) const {
  if (p.d != lo.d) return false;
  for (int i = 0; i < p.d; ++i)
    if (p.x[i] < lo.x[i] || p.x[i] > hi.x[i]) return false;
  return true;
}

bool Cuboid::contains(const Cuboid& c) const {
  if (c.empty()) return true;
  return contains(c.lo) && contains(c.hi);
}

std::uint64_t Cuboid::size() const {
  if (empty()) return 0;
  std::uint64_t n = 1;
  for (int i = 0; i < lo.d; ++i) n *= static_cast<std::uint64_t>(hi.x[i] - lo.x[i] + 1);
  return n;
}

Cuboid Cuboid::grown(Coord k) const {
  Cuboid c = *this;
  for (int i = 0; i < lo.d; ++i) {
    c.lo.x[i] -= k;
    c.hi.x[i] += k;
  }
  return c;
}

Cuboid Cuboid::intersect(const Cuboid& o) const {
  require_same_dim(lo, o.lo);
  Cuboid c = *this;
  for (int i = 0; i < lo.d; ++i) {
    c.lo.x[i] = std::max(lo.x[i], o.lo.x[i]);
    c.hi.x[i] = std::min(hi.x[i], o.hi.x[i]);
  }
  return c;
}

Coord Cuboid::l1_gap(const Cuboid& o) const {
  require_same_dim(lo, o.lo);
  Coord s = 0;
  for (int i = 0; i < lo.d; ++i) s += std::max<Coord>({0, o.lo.x[i] - hi.x[i], lo.x[i] - o.hi.x[i]});
  return s;
}

Coord Cuboid::linf_gap(const Cuboid& o) const {
  require_same_dim(lo, o.lo);
  Coord s = 0;
  for (int i = 0; i < lo.d; ++i)
    s = std::max<Coord>({s, o.lo.x[i] - hi.x[i], lo.x[i] - o.hi.x[i]});
  return s;
}

std::vector<Point> Cuboid::points() const {
  std::vector<Point> out;
  if (empty()) return out;
  out.reserve(size());
  Point p = lo;
  while (true) {
    out.push_back(p);
    int i = lo.d - 1;
    while (i >= 0 && p.x[i] == hi.x[i]) {
      p.x[i] = lo.x[i];
      --i;
    }
    if (i < 0) break;
    ++p.x[i];
  }
  return out;
}

// ---- Box / Tube ----

Box::Box(Point c, Coord r) : center(c), radius(r) {
  check_dim(c.d);
  if (r < 0) throw std::invalid_argument("box radius must be non-negative");
}

std::uint64_t Box::size() const { return cuboid().size(); }

Cuboid Box::cuboid() const {
  Cuboid c{center, center};
  return c.grown(radius);
}

Box ball(int d, Coord r) { return Box(Point(d), r); }

bool Tube::contains(const Point& p) const { return cuboid().contains(p); }

Cuboid Tube::cuboid() const {
  Cuboid c{base, base};
  c = c.grown(L);
  c.hi.x[axis] += N;
  return c;
}

Cuboid Tube::left_face() const {
  Cuboid c = cuboid();
  c.hi.x[axis] = c.lo.x[axis];
  return c;
}

Cuboid Tube::right_face() const {
  Cuboid c = cuboid();
  c.lo.x[axis] = c.hi.x[axis];
  return c;
}

// ---- PointSet ----

PointSet::PointSet(std::vector<Point> pts) : pts_(std::move(pts)) {
  if (!pts_.empty()) {
    int d = pts_.front().d;
    check_dim(d);
    for (const auto& p : pts_)
      if (p.d != d) throw DimensionError("point set with mixed dimensions");
  }
  std::sort(pts_.begin(), pts_.end());
  pts_.erase(std::unique(pts_.begin(), pts_.end()), pts_.end());
}

PointSet PointSet::from_box(const Box& b) { return from_cuboid(b.cuboid()); }
PointSet PointSet::from_cuboid(const Cuboid& c) { return PointSet(c.points()); }
PointSet PointSet::from_tube(const Tube& t) { return from_cuboid(t.cuboid()); }

bool PointSet::contains(const Point& p) const {
  return std::binary_search(pts_.begin(), pts_.end(), p);
}

std::ptrdiff_t PointSet::index_of(const Point& p) const {
  auto it = std::lower_bound(pts_.begin(), pts_.end(), p);
  if (it == pts_.end() || *it != p) return -1;
  return it - pts_.begin();
}

Cuboid PointSet::bbox() const {
  if (pts_.empty()) throw std::invalid_argument("bbox of empty point set");
  Cuboid c{pts_.front(), pts_.front()};
  for (const auto& p : pts_) {
    for (int i = 0; i < p.d; ++i) {
      c.lo.x[i] = std::min(c.lo.x[i], p.x[i]);
      c.hi.x[i] = std::max(c.hi.x[i], p.x[i]);
    }
  }
  return c;
}

static void check_pair(const PointSet& a, const PointSet& b) {
  if (!a.empty() && !b.empty() && a.dim() != b.dim())
    throw DimensionError("mixed-dimension set operation");
}

PointSet set_union(const PointSet& a, const PointSet& b) {
  check_pair(a, b);
  std::vector<Point> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return PointSet(std::move(out));
}

PointSet set_intersection(const PointSet& a, const PointSet& b) {
  check_pair(a, b);
  std::vector<Point> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return PointSet(std::move(out));
}

PointSet set_difference(const PointSet& a, const PointSet& b) {
  check_pair(a, b);
  std::vector<Point> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return PointSet(std::move(out));
}

bool is_subset(const PointSet& a, const PointSet& b) {
  check_pair(a, b);
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

PointSet boundary(const PointSet& U) {
  std::vector<Point> out;
  for (const auto& x : U) {
    for (const auto& y : neighbors(x, false)) {
      if (!U.contains(y)) {
        out.push_back(x);
        break;
      }
    }
  }
  return PointSet(std::move(out));
}

PointSet outer_boundary(const PointSet& U) {
  std::vector<Point> out;
  for (const auto& x : U)
    for (const auto& y : neighbors(x, false))
      if (!U.contains(y)) out.push_back(y);
  return PointSet(std::move(out));
}

PointSet closure(const PointSet& U) { return set_union(U, outer_boundary(U)); }

Coord linf_distance(const PointSet& A, const PointSet& B) {
  if (A.empty() || B.empty()) throw std::invalid_argument("linf_distance of empty set");
  check_pair(A, B);
  const PointSet& small = A.size() <= B.size() ? A : B;
  const PointSet& large = A.size() <= B.size() ? B : A;
  Coord best = -1;
  for (const auto& a : small) {
    if (large.contains(a)) return 0;
    for (const auto& b : large) {
      Coord dd = linf_dist(a, b);
      if (best < 0 || dd < best) best = dd;
    }
  }
  return best;
}

// ---- CuboidIndex ----

CuboidIndex::CuboidIndex(const Cuboid& c) : c_(c) {
  if (c.empty()) throw std::invalid_argument("CuboidIndex over empty cuboid");
  int d = c.lo.d;
  std::size_t s = 1;
  for (int i = d - 1; i >= 0; --i) {
    ext_[i] = c.hi.x[i] - c.lo.x[i] + 1;
    stride_[i] = s;
    s *= static_cast<std::size_t>(ext_[i]);
  }
  n_ = s;
}

std::size_t CuboidIndex::index(const Point& p) const {
  std::size_t k = 0;
  for (int i = 0; i < c_.lo.d; ++i) k += static_cast<std::size_t>(p.x[i] - c_.lo.x[i]) * stride_[i];
  return k;
}

Point CuboidIndex::point(std::size_t k) const {
  Point p = c_.lo;
  for (int i = 0; i < c_.lo.d; ++i) {
    p.x[i] += static_cast<Coord>(k / stride_[i]);
    k %= stride_[i];
  }
  return p;
}

// ---- NDJSON ----

void write_points_ndjson(std::ostream& os, const PointSet& s) {
  for (const auto& p : s) os << nlohmann::json{{"p", p.to_vector()}}.dump() << '\n';
}

PointSet read_points_ndjson(std::istream& is) {
  std::vector<Point> pts;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line);
    pts.push_back(Point::from_vector(j.at("p").get<std::vector<Coord>>()));
  }
  return PointSet(std::move(pts));
}

}  // namespace ri
