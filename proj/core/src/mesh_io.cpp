#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "monotomo/geometry.hpp"

namespace monotomo {

// Format:
//   nodes N triangles T boundary B
//   N lines "x y"
//   T lines "a b c"
//   B lines "node"      (boundary cycle, counterclockwise)
// Indices are 0-based.
void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "nodes " << mesh.num_nodes() << " triangles " << mesh.num_triangles() << " boundary "
      << mesh.num_boundary() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& p : mesh.nodes()) out << p.x() << ' ' << p.y() << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (int b : mesh.boundary_nodes()) out << b << '\n';
}

Mesh read_mesh(std::istream& in) {
  std::string k_nodes, k_tris, k_bnd;
  std::size_t n = 0, t = 0, b = 0;
  if (!(in >> k_nodes >> n >> k_tris >> t >> k_bnd >> b) || k_nodes != "nodes" ||
      k_tris != "triangles" || k_bnd != "boundary") {
    throw std::runtime_error("read_mesh: malformed header");
  }
  std::vector<Vec2> nodes(n);
  for (auto& p : nodes) {
    if (!(in >> p.x() >> p.y())) throw std::runtime_error("read_mesh: truncated node block");
  }
  std::vector<std::array<int, 3>> tris(t);
  for (auto& tri : tris) {
    if (!(in >> tri[0] >> tri[1] >> tri[2])) throw std::runtime_error("read_mesh: truncated triangle block");
  }
  std::vector<int> boundary(b);
  for (auto& v : boundary) {
    if (!(in >> v)) throw std::runtime_error("read_mesh: truncated boundary block");
    if (v < 0 || static_cast<std::size_t>(v) >= n) throw std::runtime_error("read_mesh: boundary index out of range");
  }
  double radius = 0.0;
  for (int v : boundary) radius += nodes[v].norm();
  radius /= static_cast<double>(std::max<std::size_t>(b, 1));
  return Mesh(std::move(nodes), std::move(tris), std::move(boundary), radius);
}

}  // namespace monotomo
