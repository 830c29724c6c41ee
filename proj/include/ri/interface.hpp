#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ri/lattice.hpp"

namespace ri {

/// Hypothesis failure, with a human-readable witness.
struct InterfaceError : std::runtime_error {
  InterfaceError(const std::string& what, std::string witness_)
      : std::runtime_error(what), witness(std::move(witness_)) {}
  std::string witness;
};

struct InterfacePath {
  std::vector<Point> path;        // *-path from the sphere |x| = n to |x| = m
  bool start_in_cluster = false;  // the V-crossing starts inside the chosen U-cluster
  std::size_t n_segments = 0;     // alternating pieces of the V-crossing
  bool fallback = false;          // extracted from the admissible set instead of the union
  std::vector<Point> v_crossing;
  PointSet cluster;               // the chosen crossing cluster of U
};

/// *-path close to both U and V across B_m \ B_{n-1}. Requires U and V inside
/// that annulus, U union V equal to it, and a nearest-neighbour crossing in each.
InterfacePath interface_star_path(const PointSet& U, const PointSet& V, Coord n, Coord m);

struct PathCheck {
  bool ok = true;
  std::string message;
};

/// Checks *-adjacency, both endpoints on the spheres, path inside B_m, and
/// max(d(x,U), d(x,V)) <= 1 at every site.
PathCheck check_cond_path(const std::vector<Point>& path, const PointSet& U, const PointSet& V, Coord n, Coord m);

/// Annulus {inner < |x| <= outer}; the box count uses outer - inner as sqrt(M).
struct ContactParams {
  Coord inner = 0;
  Coord outer = 0;
  Coord N = 1;
};

struct ContactBoxes {
  ContactParams params;
  std::size_t K = 0;
  std::vector<Point> centers;  // on 10N Z^d
  Coord radius = 0;            // 20N
  std::vector<Point> coarse_path;
};

std::size_t contact_box_count(const ContactParams& p);
ContactBoxes contact_boxes(const PointSet& S1, const PointSet& S2, const ContactParams& p);

struct ContactCheck {
  bool meets_both = true;    // each B(x_k, 20N) meets S1 and S2
  bool inside = true;        // each B(x_k, 25N) inside the annulus
  bool consecutive = true;   // |x_k - x_{k+1}| <= 200N
  bool separated = true;     // |x_k - x_k'| >= 100N for k != k'
  bool on_grid = true;       // centres on 10N Z^d
  bool count = true;         // exactly K boxes
  std::string message;
  bool ok() const { return meets_both && inside && consecutive && separated && on_grid && count; }
};

ContactCheck check_contact_boxes(const ContactBoxes& b, const PointSet& S1, const PointSet& S2);

void write_path_json(std::ostream& os, const InterfacePath& p);
void write_contact_json(std::ostream& os, const ContactBoxes& b);

}  // namespace ri
