#include <algorithm>
#include <stdexcept>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>

#include "monotomo/fem.hpp"

namespace monotomo {

namespace {

int slot_of(const SparseMatrix& m, int row, int col) {
  const int* begin = m.innerIndexPtr() + m.outerIndexPtr()[col];
  const int* end = m.innerIndexPtr() + m.outerIndexPtr()[col + 1];
  const int* it = std::lower_bound(begin, end, row);
  if (it == end || *it != row) throw std::logic_error("Discretization: pattern entry missing");
  return static_cast<int>(it - m.innerIndexPtr());
}

}  // namespace

Discretization::Discretization(Mesh mesh) : mesh_(std::move(mesh)) {
  const std::size_t ne = mesh_.num_triangles();
  const std::size_t nn = mesh_.num_nodes();
  grads_.resize(ne);
  areas_.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& t = mesh_.triangles()[e];
    const Vec2& p0 = mesh_.nodes()[t[0]];
    const Vec2& p1 = mesh_.nodes()[t[1]];
    const Vec2& p2 = mesh_.nodes()[t[2]];
    const double twice = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
    areas_[e] = 0.5 * twice;
    // grad phi_a = rot90(opposite edge) / (2 area)
    const std::array<Vec2, 3> pts{p0, p1, p2};
    for (int a = 0; a < 3; ++a) {
      const Vec2& pb = pts[(a + 1) % 3];
      const Vec2& pc = pts[(a + 2) % 3];
      grads_[e][a] = Vec2(pb.y() - pc.y(), pc.x() - pb.x()) / twice;
    }
  }

  boundary_of_node_.assign(nn, -1);
  for (std::size_t k = 0; k < mesh_.num_boundary(); ++k) boundary_of_node_[mesh_.boundary_nodes()[k]] = static_cast<int>(k);

  // Natural interior numbering first, then a fill-reducing relabeling.
  std::vector<int> natural(nn, -1);
  std::vector<int> natural_nodes;
  for (std::size_t v = 0; v < nn; ++v) {
    if (boundary_of_node_[v] < 0) {
      natural[v] = static_cast<int>(natural_nodes.size());
      natural_nodes.push_back(static_cast<int>(v));
    }
  }
  const int ni = static_cast<int>(natural_nodes.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * ne);
  for (const auto& t : mesh_.triangles()) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const int ia = natural[t[a]], ib = natural[t[b]];
        if (ia >= 0 && ib >= 0) trip.emplace_back(ia, ib, 1.0);
      }
    }
  }
  SparseMatrix full(ni, ni);
  full.setFromTriplets(trip.begin(), trip.end());
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm;
  if (ni > 0) {
    Eigen::AMDOrdering<int> amd;
    amd(full.selfadjointView<Eigen::Lower>(), perm);
  } else {
    perm.resize(0);
  }
  // twistedBy(P^-1) maps old index i to P^-1(i); mirror that labeling.
  const Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pinv = perm.inverse();
  interior_of_node_.assign(nn, -1);
  interior_nodes_.assign(ni, -1);
  for (int k = 0; k < ni; ++k) {
    const int label = pinv.indices()[k];
    interior_of_node_[natural_nodes[k]] = label;
    interior_nodes_[label] = natural_nodes[k];
  }

  trip.clear();
  std::vector<Eigen::Triplet<double>> trip_ib;
  for (const auto& t : mesh_.triangles()) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const int ia = interior_of_node_[t[a]], ib = interior_of_node_[t[b]];
        if (ia >= 0 && ib >= 0 && ia >= ib) trip.emplace_back(ia, ib, 0.0);
        const int jb = boundary_of_node_[t[b]];
        if (ia >= 0 && jb >= 0) trip_ib.emplace_back(ia, jb, 0.0);
      }
    }
  }
  kii_pattern_.resize(ni, ni);
  kii_pattern_.setFromTriplets(trip.begin(), trip.end());
  kii_pattern_.makeCompressed();
  kib_pattern_.resize(ni, static_cast<int>(mesh_.num_boundary()));
  kib_pattern_.setFromTriplets(trip_ib.begin(), trip_ib.end());
  kib_pattern_.makeCompressed();

  kii_slots_.resize(ne);
  kib_slots_.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& t = mesh_.triangles()[e];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const int ia = interior_of_node_[t[a]], ib = interior_of_node_[t[b]];
        const int jb = boundary_of_node_[t[b]];
        kii_slots_[e][3 * a + b] = (ia >= 0 && ib >= 0 && ia >= ib) ? slot_of(kii_pattern_, ia, ib) : -1;
        kib_slots_[e][3 * a + b] = (ia >= 0 && jb >= 0) ? slot_of(kib_pattern_, ia, jb) : -1;
      }
    }
  }
}

Vec2 Discretization::gradient(std::size_t e, const Field& u) const {
  const auto& t = mesh_.triangles()[e];
  const auto& g = grads_[e];
  return u[t[0]] * g[0] + u[t[1]] * g[1] + u[t[2]] * g[2];
}

}  // namespace monotomo
