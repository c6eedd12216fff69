#include "monotomo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

namespace monotomo {

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

}  // namespace

Mesh::Mesh(std::vector<Vec2> nodes, std::vector<std::array<int, 3>> triangles,
           std::vector<int> boundary_nodes, double radius)
    : nodes_(std::move(nodes)),
      triangles_(std::move(triangles)),
      boundary_nodes_(std::move(boundary_nodes)),
      radius_(radius) {
  if (!(radius_ > 0.0)) throw std::invalid_argument("mesh radius must be positive");
  if (boundary_nodes_.size() < 3) throw std::invalid_argument("mesh boundary needs at least 3 nodes");

  const int n = static_cast<int>(nodes_.size());
  std::map<EdgeKey, int> edge_use;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int v : tri) {
      if (v < 0 || v >= n) throw std::invalid_argument("triangle references missing node");
    }
    if (!(area(t) > 0.0)) {
      throw std::invalid_argument("triangle " + std::to_string(t) + " has nonpositive area");
    }
    for (int k = 0; k < 3; ++k) ++edge_use[edge_key(tri[k], tri[(k + 1) % 3])];
  }

  const std::size_t nb = boundary_nodes_.size();
  boundary_edges_.reserve(nb);
  std::set<EdgeKey> cycle;
  for (std::size_t k = 0; k < nb; ++k) {
    const int a = boundary_nodes_[k];
    const int b = boundary_nodes_[(k + 1) % nb];
    if (a < 0 || a >= n) throw std::invalid_argument("boundary references missing node");
    boundary_edges_.push_back({a, b});
    if (!cycle.insert(edge_key(a, b)).second) {
      throw std::invalid_argument("boundary cycle repeats an edge");
    }
  }
  if (std::set<int>(boundary_nodes_.begin(), boundary_nodes_.end()).size() != nb) {
    throw std::invalid_argument("boundary cycle repeats a node");
  }

  for (const auto& [key, uses] : edge_use) {
    const bool on_cycle = cycle.count(key) > 0;
    if (on_cycle && uses != 1) throw std::invalid_argument("boundary edge not owned by exactly one triangle");
    if (!on_cycle && uses != 2) throw std::invalid_argument("edge outside the boundary cycle is not shared by two triangles");
  }
  for (const auto& key : cycle) {
    if (!edge_use.count(key)) throw std::invalid_argument("boundary edge is not a triangle edge");
  }

  const long euler = static_cast<long>(nodes_.size()) - static_cast<long>(edge_use.size()) +
                     static_cast<long>(triangles_.size());
  if (euler != 1) throw std::invalid_argument("Euler relation V - E + F = 1 violated");

  for (int b : boundary_nodes_) {
    if (std::abs(nodes_[b].norm() - radius_) > 1e-9 * radius_) {
      throw std::invalid_argument("boundary node off the circle");
    }
  }
}

double Mesh::area(std::size_t t) const {
  const auto& tri = triangles_[t];
  return signed_area(nodes_[tri[0]], nodes_[tri[1]], nodes_[tri[2]]);
}

Vec2 Mesh::centroid(std::size_t t) const {
  const auto& tri = triangles_[t];
  return (nodes_[tri[0]] + nodes_[tri[1]] + nodes_[tri[2]]) / 3.0;
}

std::size_t Mesh::num_edges() const {
  std::set<EdgeKey> edges;
  for (const auto& tri : triangles_) {
    for (int k = 0; k < 3; ++k) edges.insert(edge_key(tri[k], tri[(k + 1) % 3]));
  }
  return edges.size();
}

Mesh build_disk_mesh(double radius, int rings) {
  if (rings < 1) throw std::invalid_argument("build_disk_mesh: rings must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("build_disk_mesh: radius must be positive");

  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<Vec2> nodes;
  nodes.reserve(1 + 3 * static_cast<std::size_t>(rings) * (rings + 1));
  nodes.emplace_back(0.0, 0.0);

  // ring_start[k] is the index of the first node of ring k; ring 0 is the center.
  std::vector<int> ring_start(rings + 1, 0);
  for (int k = 1; k <= rings; ++k) {
    ring_start[k] = static_cast<int>(nodes.size());
    const int count = 6 * k;
    const double r = radius * static_cast<double>(k) / rings;
    for (int j = 0; j < count; ++j) {
      const double theta = two_pi * j / count;
      // Outer ring lands exactly on the circle.
      nodes.emplace_back(r * std::cos(theta), r * std::sin(theta));
    }
  }

  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(6 * static_cast<std::size_t>(rings) * rings);
  auto push_ccw = [&](int a, int b, int c) {
    if (signed_area(nodes[a], nodes[b], nodes[c]) < 0.0) std::swap(b, c);
    triangles.push_back({a, b, c});
  };

  for (int j = 0; j < 6; ++j) push_ccw(0, ring_start[1] + j, ring_start[1] + (j + 1) % 6);

  // Zip ring k-1 with ring k by advancing whichever front has the smaller
  // next angle.
  for (int k = 2; k <= rings; ++k) {
    const int n_in = 6 * (k - 1);
    const int n_out = 6 * k;
    int i = 0, o = 0;
    while (i < n_in || o < n_out) {
      const double next_in = static_cast<double>(i + 1) / n_in;
      const double next_out = static_cast<double>(o + 1) / n_out;
      const int in_a = ring_start[k - 1] + i % n_in;
      const int out_a = ring_start[k] + o % n_out;
      if (o < n_out && (i >= n_in || next_out <= next_in)) {
        const int out_b = ring_start[k] + (o + 1) % n_out;
        push_ccw(in_a, out_a, out_b);
        ++o;
      } else {
        const int in_b = ring_start[k - 1] + (i + 1) % n_in;
        push_ccw(in_a, out_a, in_b);
        ++i;
      }
    }
  }

  std::vector<int> boundary(6 * rings);
  for (int j = 0; j < 6 * rings; ++j) boundary[j] = ring_start[rings] + j;

  return Mesh(std::move(nodes), std::move(triangles), std::move(boundary), radius);
}

int rings_for_boundary_count(int boundary_nodes) {
  if (boundary_nodes < 1) throw std::invalid_argument("boundary count must be positive");
  return (boundary_nodes + 5) / 6;
}

ElementMask classify_elements(const Mesh& mesh, const Region& region) {
  ElementMask mask(mesh.num_triangles(), 0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    mask[t] = region.contains(mesh.centroid(t)) ? 1 : 0;
  }
  return mask;
}

double masked_area(const Mesh& mesh, const ElementMask& mask) {
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (mask[t]) total += mesh.area(t);
  }
  return total;
}

}  // namespace monotomo
