#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace ri {

inline constexpr int kMaxDim = 6;
using Coord = std::int64_t;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Throws unless 3 <= d <= kMaxDim.
void check_dim(int d);

/// Lattice point of Z^d; unused trailing slots stay zero.
struct Point {
  int d = 0;
  std::array<Coord, kMaxDim> x{};

  Point() = default;
  explicit Point(int dim);
  Point(std::initializer_list<Coord> coords);
  static Point from_vector(const std::vector<Coord>& coords);

  Coord& operator[](int i) { return x[static_cast<std::size_t>(i)]; }
  Coord operator[](int i) const { return x[static_cast<std::size_t>(i)]; }
  std::vector<Coord> to_vector() const;
  std::string str() const;

  friend bool operator==(const Point&, const Point&) = default;
  friend std::strong_ordering operator<=>(const Point& a, const Point& b) {
    if (auto c = a.d <=> b.d; c != 0) return c;
    for (int i = 0; i < a.d; ++i)
      if (auto c = a.x[i] <=> b.x[i]; c != 0) return c;
    return std::strong_ordering::equal;
  }
};

struct PointHash {
  std::size_t operator()(const Point& p) const noexcept;
};

void require_same_dim(const Point& a, const Point& b);

Point operator+(const Point& a, const Point& b);
Point operator-(const Point& a, const Point& b);
Point unit_vector(int d, int axis, int sign = 1);

Coord linf_norm(const Point& p);
Coord l1_norm(const Point& p);
Coord linf_dist(const Point& a, const Point& b);
bool adjacent(const Point& a, const Point& b);       // |a-b|_1 == 1
bool star_adjacent(const Point& a, const Point& b);  // |a-b|_inf == 1

/// 2d nearest neighbours, or the 3^d - 1 star neighbours.
std::vector<Point> neighbors(const Point& p, bool star);

/// Axis-aligned integer cuboid [lo, hi] (inclusive). Empty when some lo > hi.
struct Cuboid {
  Point lo, hi;

  bool empty() const;
  bool contains(const Point& p) const;
  bool contains(const Cuboid& c) const;
  std::uint64_t size() const;
  Cuboid grown(Coord k) const;
  Cuboid intersect(const Cuboid& o) const;
  /// Per-axis gap max(0, o.lo - hi, lo - o.hi), summed; 0 means overlap.
  Coord l1_gap(const Cuboid& o) const;
  Coord linf_gap(const Cuboid& o) const;
  std::vector<Point> points() const;
  friend bool operator==(const Cuboid&, const Cuboid&) = default;
};

/// Closed l-infinity ball B(center, radius).
struct Box {
  Point center;
  Coord radius = 0;

  Box() = default;
  Box(Point c, Coord r);
  bool contains(const Point& p) const { return linf_dist(p, center) <= radius; }
  std::uint64_t size() const;
  Cuboid cuboid() const;
  friend bool operator==(const Box&, const Box&) = default;
};

Box ball(int d, Coord r);

/// Union of B(base + n e_axis, L) for 0 <= n <= N.
struct Tube {
  Point base;
  int axis = 0;  // 0-based
  Coord L = 0;
  Coord N = 0;

  bool contains(const Point& p) const;
  Cuboid cuboid() const;
  Cuboid left_face() const;
  Cuboid right_face() const;
  int dim() const { return base.d; }
};

class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::vector<Point> pts);
  static PointSet from_box(const Box& b);
  static PointSet from_cuboid(const Cuboid& c);
  static PointSet from_tube(const Tube& t);

  bool contains(const Point& p) const;
  std::size_t size() const { return pts_.size(); }
  bool empty() const { return pts_.empty(); }
  int dim() const { return pts_.empty() ? 0 : pts_.front().d; }
  const std::vector<Point>& points() const { return pts_; }
  auto begin() const { return pts_.begin(); }
  auto end() const { return pts_.end(); }
  const Point& operator[](std::size_t i) const { return pts_[i]; }
  /// Position of p in sorted order, or -1.
  std::ptrdiff_t index_of(const Point& p) const;
  Cuboid bbox() const;

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  std::vector<Point> pts_;
};

PointSet set_union(const PointSet& a, const PointSet& b);
PointSet set_intersection(const PointSet& a, const PointSet& b);
PointSet set_difference(const PointSet& a, const PointSet& b);
bool is_subset(const PointSet& a, const PointSet& b);

/// Interior vertex boundary: points of U with a neighbour outside U.
PointSet boundary(const PointSet& U);
/// Points outside U adjacent to U.
PointSet outer_boundary(const PointSet& U);
PointSet closure(const PointSet& U);

/// min |a-b|_inf over pairs; throws on empty input.
Coord linf_distance(const PointSet& A, const PointSet& B);

/// Dense row-major indexing of a cuboid's sites.
class CuboidIndex {
 public:
  CuboidIndex() = default;
  explicit CuboidIndex(const Cuboid& c);
  const Cuboid& cuboid() const { return c_; }
  std::size_t size() const { return n_; }
  int dim() const { return c_.lo.d; }
  bool contains(const Point& p) const { return c_.contains(p); }
  std::size_t index(const Point& p) const;
  Point point(std::size_t i) const;
  Coord extent(int axis) const { return ext_[axis]; }
  std::size_t stride(int axis) const { return stride_[axis]; }

 private:
  Cuboid c_;
  std::array<Coord, kMaxDim> ext_{};
  std::array<std::size_t, kMaxDim> stride_{};
  std::size_t n_ = 0;
};

/// NDJSON, one `{"p":[...]}` per line.
void write_points_ndjson(std::ostream& os, const PointSet& s);
PointSet read_points_ndjson(std::istream& is);

}  // namespace ri
