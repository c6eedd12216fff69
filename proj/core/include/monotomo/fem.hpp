#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "monotomo/errors.hpp"
#include "monotomo/geometry.hpp"
#include "monotomo/materials.hpp"

namespace monotomo {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Nodal P1 potential, one value per mesh node.
using Field = Eigen::VectorXd;

/// Per-mesh precomputation shared by every solve on that mesh: element
/// gradients, an interior numbering with fill-reducing order baked in, and
/// assembly slot maps. Immutable after construction.
class Discretization {
 public:
  explicit Discretization(Mesh mesh);

  const Mesh& mesh() const { return mesh_; }
  std::size_t num_interior() const { return interior_nodes_.size(); }
  std::size_t num_boundary() const { return mesh_.num_boundary(); }

  /// Interior unknown index of a node, or -1 for boundary nodes.
  int interior_index(int node) const { return interior_of_node_[node]; }
  /// Position of a node in the boundary cycle, or -1 for interior nodes.
  int boundary_index(int node) const { return boundary_of_node_[node]; }
  const std::vector<int>& interior_nodes() const { return interior_nodes_; }

  /// Gradients of the three barycentric hat functions on element e.
  const std::array<Vec2, 3>& gradients(std::size_t e) const { return grads_[e]; }
  double area(std::size_t e) const { return areas_[e]; }
  /// Gradient of a nodal field on element e.
  Vec2 gradient(std::size_t e, const Field& u) const;

  /// Interior-interior pattern (lower triangle) and element slot maps used by
  /// the assembly kernels. Slot -1 marks entries outside the block.
  const SparseMatrix& interior_pattern() const { return kii_pattern_; }
  const SparseMatrix& coupling_pattern() const { return kib_pattern_; }
  const std::array<int, 9>& interior_slots(std::size_t e) const { return kii_slots_[e]; }
  const std::array<int, 9>& coupling_slots(std::size_t e) const { return kib_slots_[e]; }

 private:
  Mesh mesh_;
  std::vector<std::array<Vec2, 3>> grads_;
  std::vector<double> areas_;
  std::vector<int> interior_of_node_;
  std::vector<int> boundary_of_node_;
  std::vector<int> interior_nodes_;
  SparseMatrix kii_pattern_;
  SparseMatrix kib_pattern_;
  std::vector<std::array<int, 9>> kii_slots_;
  std::vector<std::array<int, 9>> kib_slots_;
};

/// Boundary trace in boundary-cycle order, times an amplitude.
struct BoundaryPotential {
  Eigen::VectorXd values;
  double scale = 1.0;

  Eigen::VectorXd trace() const { return scale * values; }
};

/// Piecewise-linear segment mass matrix on the boundary cycle.
Eigen::MatrixXd boundary_mass_matrix(const Mesh& mesh);

/// Subtracts the mass-weighted mean: returns f - (1^T M f / 1^T M 1) 1.
Eigen::VectorXd project_zero_mean(const Eigen::MatrixXd& mass, const Eigen::VectorXd& f);

/// Zero-mean boundary potential sampled from g at the boundary nodes.
BoundaryPotential sample_boundary(const Discretization& disc, const std::function<double(const Vec2&)>& g,
                                  double scale = 1.0);

/// Full nodal stiffness K_ij = sum_e coeff_e int_e grad phi_i . grad phi_j.
SparseMatrix assemble_stiffness(const Mesh& mesh, const std::vector<double>& coeff);

using SolverLog = std::function<void(const std::string&)>;

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 50;
  int max_halvings = 30;
  /// Receives one line per iteration: `newton iter=.. residual=.. step=.. mode=..`.
  SolverLog log;
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;            // final residual norm
  double reference_residual = 0.0;  // residual with the interior set to zero
  bool picard_used = false;
};

struct Solution {
  Field u;
  SolveReport report;
};

/// Linear Dirichlet solve; throws std::logic_error for nonlinear fields.
Field solve_linear_dirichlet(const Discretization& disc, const MaterialField& field, const BoundaryPotential& f);

/// Damped Newton with a Picard fallback. Iteration 1 is the linear lift at
/// gamma(0). Throws ConvergenceFailure after max_iter.
Solution solve_nonlinear_dirichlet(const Discretization& disc, const MaterialField& field, const BoundaryPotential& f,
                                   const SolverOptions& options = {});

/// Interior residual of the discrete weak form at the nodal state u, in
/// interior numbering.
Eigen::VectorXd weak_residual(const Discretization& disc, const MaterialField& field, const Field& u);

/// Consistent Newton tangent of `weak_residual` (full symmetric interior block).
SparseMatrix newton_tangent(const Discretization& disc, const MaterialField& field, const Field& u);

double dirichlet_energy(const Discretization& disc, const MaterialField& field, const Field& u);

/// <Lambda(u|bd), u|bd> = sum_e area_e gamma_e(s_e) s_e^2.
double flux_pairing(const Discretization& disc, const MaterialField& field, const Field& u);

/// <Lambda(f), f>.
double dtn_pairing(const Discretization& disc, const MaterialField& field, const BoundaryPotential& f,
                   const SolverOptions& options = {});

/// <avg Lambda(f), f> as the Dirichlet energy of the solution.
double avg_dtn_pairing(const Discretization& disc, const MaterialField& field, const BoundaryPotential& f,
                       const SolverOptions& options = {});

/// <avg Lambda(f), f> = int_0^1 <Lambda(a f), f> da by Gauss-Legendre.
double avg_dtn_pairing_quadrature(const Discretization& disc, const MaterialField& field, const BoundaryPotential& f,
                                  int points = 8, const SolverOptions& options = {});

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_unit(int points, std::vector<double>& nodes, std::vector<double>& weights);

struct DtNMatrix {
  Eigen::MatrixXd k;     // quadratic form on boundary values
  Eigen::MatrixXd mass;  // boundary mass matrix
};

/// K_bb - K_bi K_ii^-1 K_ib for a linear field.
DtNMatrix schur_dtn_matrix(const Discretization& disc, const MaterialField& field);

/// Writes "node,x,y,u" rows.
void write_field_csv(std::ostream& out, const Mesh& mesh, const Field& u);

}  // namespace monotomo
