#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace monotomo {

using Vec2 = Eigen::Vector2d;

/// Triangulated disk with an ordered boundary cycle.
///
/// Triangles are counterclockwise. The boundary cycle runs counterclockwise
/// and `boundary_edges()[k]` joins `boundary_nodes()[k]` to
/// `boundary_nodes()[(k + 1) % B]`. The constructor checks every invariant and
/// throws std::invalid_argument on violation.
class Mesh {
 public:
  Mesh(std::vector<Vec2> nodes, std::vector<std::array<int, 3>> triangles,
       std::vector<int> boundary_nodes, double radius);

  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<std::array<int, 2>>& boundary_edges() const { return boundary_edges_; }
  const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
  double radius() const { return radius_; }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_boundary() const { return boundary_nodes_.size(); }

  /// Signed area of triangle t (positive for every valid mesh).
  double area(std::size_t t) const;
  Vec2 centroid(std::size_t t) const;

  /// Number of distinct undirected edges.
  std::size_t num_edges() const;

 private:
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<int> boundary_nodes_;
  std::vector<std::array<int, 2>> boundary_edges_;
  double radius_;
};

/// Concentric-ring triangulation of the disk of the given radius.
///
/// Ring k (1..rings) carries 6k equally spaced nodes; the mesh has
/// 1 + 3 rings (rings + 1) nodes, 6 rings^2 triangles and 6 rings boundary
/// nodes.
Mesh build_disk_mesh(double radius, int rings);

/// Smallest ring count whose boundary has at least `boundary_nodes` nodes.
int rings_for_boundary_count(int boundary_nodes);

void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

/// Shape predicate on the plane.
///
/// Regions are immutable values; copies share their children.
class Region {
 public:
  struct Circle {
    Vec2 center;
    double radius;
  };
  struct Ellipse {
    Vec2 center;
    double semi_a;
    double semi_b;
    double rotation;  // radians, counterclockwise
  };
  struct Polygon {
    std::vector<Vec2> vertices;
  };
  struct HalfPlane {
    Vec2 anchor;
    Vec2 normal;  // points into the region
  };
  struct Union {
    std::vector<Region> parts;
  };
  struct Complement {
    std::shared_ptr<const Region> inner;
  };
  using Variant = std::variant<Circle, Ellipse, Polygon, HalfPlane, Union, Complement>;

  static Region circle(Vec2 center, double radius);
  static Region ellipse(Vec2 center, double semi_a, double semi_b, double rotation = 0.0);
  /// Throws std::invalid_argument when the vertex list is not a simple polygon.
  static Region polygon(std::vector<Vec2> vertices);
  static Region rectangle(Vec2 lower_left, Vec2 upper_right);
  static Region half_plane(Vec2 anchor, Vec2 normal);
  static Region union_of(std::vector<Region> parts);
  static Region complement(Region inner);
  static Region intersection(Region a, Region b);
  static Region empty() { return union_of({}); }

  bool contains(const Vec2& p) const;

  /// Support function h(n) = sup { p . n : p in region } for unit n.
  /// Empty for unbounded regions (half-planes, complements).
  std::optional<double> support(const Vec2& unit_normal) const;

  /// sup |p| over the region, or empty when unbounded.
  std::optional<double> max_radius() const;

  /// Boundary polylines (closed) for display; half-planes are clipped to the
  /// disk of `domain_radius`.
  std::vector<std::vector<Vec2>> outline(double domain_radius, int samples = 128) const;

  std::string describe() const;

  const Variant& shape() const { return shape_; }

 private:
  explicit Region(Variant v) : shape_(std::move(v)) {}
  Variant shape_;
};

/// One flag per triangle: 1 when the triangle belongs to the region.
using ElementMask = std::vector<std::uint8_t>;

/// Centroid rule: a triangle is inside iff its centroid is inside.
ElementMask classify_elements(const Mesh& mesh, const Region& region);

double masked_area(const Mesh& mesh, const ElementMask& mask);

/// Labeled polygonal stand-ins for the non-convex reconstruction targets.
/// Every polygon has at least 64 vertices.
namespace shapes {
Region peanut(Vec2 center, double scale, int vertices = 96);
Region kite(Vec2 center, double scale, int vertices = 96);
Region droplet(Vec2 center, double scale, int vertices = 96);
/// Annulus as an intersection of a disk and the complement of a smaller one.
Region hollow_circle(Vec2 center, double outer_radius, double inner_radius);
}  // namespace shapes

}  // namespace monotomo
