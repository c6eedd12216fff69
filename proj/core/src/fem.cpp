#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "monotomo/fem.hpp"

namespace monotomo {

namespace {

using Ldlt = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>>;

struct Blocks {
  SparseMatrix kii;  // lower triangle
  SparseMatrix kib;
};

// fn(e, ke) fills the symmetric 3x3 element matrix.
template <class ElementFn>
Blocks assemble_blocks(const Discretization& disc, ElementFn&& fn) {
  Blocks b{disc.interior_pattern(), disc.coupling_pattern()};
  double* vii = b.kii.valuePtr();
  double* vib = b.kib.valuePtr();
  std::fill(vii, vii + b.kii.nonZeros(), 0.0);
  std::fill(vib, vib + b.kib.nonZeros(), 0.0);
  Eigen::Matrix3d ke;
  for (std::size_t e = 0; e < disc.mesh().num_triangles(); ++e) {
    fn(e, ke);
    const auto& si = disc.interior_slots(e);
    const auto& sb = disc.coupling_slots(e);
    for (int k = 0; k < 9; ++k) {
      if (si[k] >= 0) vii[si[k]] += ke(k / 3, k % 3);
      if (sb[k] >= 0) vib[sb[k]] += ke(k / 3, k % 3);
    }
  }
  return b;
}

void isotropic_element(const Discretization& disc, std::size_t e, double c, Eigen::Matrix3d& ke) {
  const auto& g = disc.gradients(e);
  const double w = c * disc.area(e);
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b) ke(a, b) = ke(b, a) = w * g[a].dot(g[b]);
  }
}

void factorize(Ldlt& solver, const SparseMatrix& kii) {
  solver.compute(kii);
  if (solver.info() != Eigen::Success) throw NumericalFailure("interior factorization failed");
}

Eigen::VectorXd boundary_values(const Discretization& disc, const BoundaryPotential& f) {
  if (static_cast<std::size_t>(f.values.size()) != disc.num_boundary()) {
    throw std::invalid_argument("boundary potential size does not match the boundary node count");
  }
  Eigen::VectorXd t = f.trace();
  if (!t.allFinite()) throw std::invalid_argument("boundary potential has non-finite values");
  return t;
}

Field scatter(const Discretization& disc, const Eigen::VectorXd& interior, const Eigen::VectorXd& boundary) {
  Field u(disc.mesh().num_nodes());
  const auto& bn = disc.mesh().boundary_nodes();
  for (std::size_t k = 0; k < bn.size(); ++k) u[bn[k]] = boundary[k];
  const auto& in = disc.interior_nodes();
  for (std::size_t k = 0; k < in.size(); ++k) u[in[k]] = interior[k];
  return u;
}

Eigen::VectorXd interior_part(const Discretization& disc, const Field& u) {
  Eigen::VectorXd x(disc.num_interior());
  const auto& in = disc.interior_nodes();
  for (std::size_t k = 0; k < in.size(); ++k) x[k] = u[in[k]];
  return x;
}

Field solve_with_coefficients(const Discretization& disc, const std::vector<double>& coeff, const Eigen::VectorXd& fb) {
  Blocks b = assemble_blocks(disc, [&](std::size_t e, Eigen::Matrix3d& ke) { isotropic_element(disc, e, coeff[e], ke); });
  Ldlt solver;
  factorize(solver, b.kii);
  Eigen::VectorXd rhs = -(b.kib * fb);
  Eigen::VectorXd x = solver.solve(rhs);
  if (!x.allFinite()) throw NumericalFailure("linear Dirichlet solve produced non-finite values");
  return scatter(disc, x, fb);
}

enum class TangentMode { Newton, Picard };

SparseMatrix tangent_lower(const Discretization& disc, const MaterialField& field, const Field& u, TangentMode mode) {
  const std::size_t ne = disc.mesh().num_triangles();
  std::vector<double> gam(ne), dgam(ne), s(ne);
  std::vector<Vec2> dir(ne);
  double gmax = 0.0;
  for (std::size_t e = 0; e < ne; ++e) {
    const Vec2 g = disc.gradient(e, u);
    s[e] = g.norm();
    dir[e] = s[e] > 0.0 ? Vec2(g / s[e]) : Vec2(0.0, 0.0);
    gam[e] = field.gamma(e, s[e]);
    dgam[e] = (mode == TangentMode::Newton && s[e] > 0.0) ? field.dgamma(e, s[e]) : 0.0;
    gmax = std::max(gmax, gam[e]);
  }
  // Laws with gamma(0) = 0 (p-Laplacian) give a singular tangent where grad u
  // vanishes.
  const double floor = 1e-12 * (gmax > 0.0 ? gmax : 1.0);
  Blocks b = assemble_blocks(disc, [&](std::size_t e, Eigen::Matrix3d& ke) {
    const auto& g = disc.gradients(e);
    const double area = disc.area(e);
    const double iso = std::max(gam[e], floor);
    const double rank1 = dgam[e] * s[e];
    for (int a = 0; a < 3; ++a) {
      for (int c = a; c < 3; ++c) {
        const double v = iso * g[a].dot(g[c]) + rank1 * dir[e].dot(g[a]) * dir[e].dot(g[c]);
        ke(a, c) = ke(c, a) = area * v;
      }
    }
  });
  return b.kii;
}

std::vector<double> lift_coefficients(const MaterialField& field) {
  std::vector<double> c(field.size());
  bool ok = true;
  for (std::size_t e = 0; e < c.size(); ++e) {
    c[e] = field.gamma(e, 0.0);
    if (!(c[e] > 0.0) || !std::isfinite(c[e])) ok = false;
  }
  if (!ok) std::fill(c.begin(), c.end(), 1.0);
  return c;
}

void emit(const SolverOptions& opt, int iter, double residual, double step, const char* mode) {
  if (!opt.log) return;
  char buf[160];
  std::snprintf(buf, sizeof buf, "newton iter=%d residual=%.6e step=%.6e mode=%s", iter, residual, step, mode);
  opt.log(buf);
}

}  // namespace

// ---------------------------------------------------------------------------

Eigen::MatrixXd boundary_mass_matrix(const Mesh& mesh) {
  const std::size_t nb = mesh.num_boundary();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nb, nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const std::size_t j = (k + 1) % nb;
    const double h = (mesh.nodes()[mesh.boundary_nodes()[j]] - mesh.nodes()[mesh.boundary_nodes()[k]]).norm();
    m(k, k) += h / 3.0;
    m(j, j) += h / 3.0;
    m(k, j) += h / 6.0;
    m(j, k) += h / 6.0;
  }
  return m;
}

Eigen::VectorXd project_zero_mean(const Eigen::MatrixXd& mass, const Eigen::VectorXd& f) {
  const Eigen::VectorXd w = mass.rowwise().sum();
  return f.array() - w.dot(f) / w.sum();
}

BoundaryPotential sample_boundary(const Discretization& disc, const std::function<double(const Vec2&)>& g,
                                  double scale) {
  const auto& mesh = disc.mesh();
  Eigen::VectorXd v(mesh.num_boundary());
  for (std::size_t k = 0; k < mesh.num_boundary(); ++k) v[k] = g(mesh.nodes()[mesh.boundary_nodes()[k]]);
  return {project_zero_mean(boundary_mass_matrix(mesh), v), scale};
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const std::vector<double>& coeff) {
  if (coeff.size() != mesh.num_triangles()) throw std::invalid_argument("assemble_stiffness: one coefficient per element");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * mesh.num_triangles());
  for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
    if (!(coeff[e] > 0.0) || !std::isfinite(coeff[e])) {
      throw std::invalid_argument("assemble_stiffness: coefficients must be positive");
    }
    const auto& t = mesh.triangles()[e];
    const Vec2& p0 = mesh.nodes()[t[0]];
    const Vec2& p1 = mesh.nodes()[t[1]];
    const Vec2& p2 = mesh.nodes()[t[2]];
    const std::array<Vec2, 3> pts{p0, p1, p2};
    const double twice = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
    std::array<Vec2, 3> g;
    for (int a = 0; a < 3; ++a) {
      const Vec2& pb = pts[(a + 1) % 3];
      const Vec2& pc = pts[(a + 2) % 3];
      g[a] = Vec2(pb.y() - pc.y(), pc.x() - pb.x()) / twice;
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) trip.emplace_back(t[a], t[b], coeff[e] * 0.5 * twice * g[a].dot(g[b]));
    }
  }
  const int n = static_cast<int>(mesh.num_nodes());
  SparseMatrix k(n, n);
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

Field solve_linear_dirichlet(const Discretization& disc, const MaterialField& field, const BoundaryPotential& f) {
  if (field.size() != disc.mesh().num_triangles()) throw std::invalid_argument("material field size mismatch");
  const std::vector<double> c = field.linear_coefficients();
  for (double v : c) {
    if (!(v > 0.0)) throw std::invalid_argument("linear coefficients must be positive");
  }
  return solve_with_coefficients(disc, c, boundary_values(disc, f));
}

Eigen::VectorXd weak_residual(const Discretization& disc, const MaterialField& field, const Field& u) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(disc.num_interior());
  const auto& tris = disc.mesh().triangles();
  for (std::size_t e = 0; e < tris.size(); ++e) {
    const Vec2 g = disc.gradient(e, u);
    const Vec2 flux = field.gamma(e, g.norm()) * disc.area(e) * g;
    const auto& grads = disc.gradients(e);
    for (int a = 0; a < 3; ++a) {
      const int i = disc.interior_index(tris[e][a]);
      if (i >= 0) r[i] += flux.dot(grads[a]);
    }
  }
  return r;
}

SparseMatrix newton_tangent(const Discretization& disc, const MaterialField& field, const Field& u) {
  SparseMatrix lower = tangent_lower(disc, field, u, TangentMode::Newton);
  return SparseMatrix(lower.selfadjointView<Eigen::Lower>());
}

Solution solve_nonlinear_dirichlet(const Discretization& disc, const MaterialField& field, const BoundaryPotential& f,
                                   const SolverOptions& opt) {
  if (field.size() != disc.mesh().num_triangles()) throw std::invalid_argument("material field size mismatch");
  const Eigen::VectorXd fb = boundary_values(disc, f);
  Solution sol;
  sol.report.reference_residual = weak_residual(disc, field, scatter(disc, Eigen::VectorXd::Zero(disc.num_interior()), fb)).norm();
  sol.u = solve_with_coefficients(disc, lift_coefficients(field), fb);
  int iter = 1;
  Eigen::VectorXd r = weak_residual(disc, field, sol.u);
  double rn = r.norm();
  emit(opt, iter, rn, 1.0, "lift");
  const double target = opt.tol * sol.report.reference_residual;
  TangentMode mode = TangentMode::Newton;
  Ldlt solver;
  while (rn > target) {
    if (iter >= opt.max_iter) {
      throw ConvergenceFailure("nonlinear solve did not converge in " + std::to_string(opt.max_iter) + " iterations",
                               rn, iter);
    }
    ++iter;
    factorize(solver, tangent_lower(disc, field, sol.u, mode));
    const Eigen::VectorXd du = solver.solve(-r);
    if (!du.allFinite()) throw NumericalFailure("Newton step produced non-finite values");
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd x = interior_part(disc, sol.u);
    for (int h = 0; h <= opt.max_halvings; ++h, step *= 0.5) {
      Field trial = scatter(disc, x + step * du, fb);
      Eigen::VectorXd rt = weak_residual(disc, field, trial);
      const double rtn = rt.norm();
      if (std::isfinite(rtn) && rtn < rn) {
        sol.u = std::move(trial);
        r = std::move(rt);
        rn = rtn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (mode == TangentMode::Picard) {
        throw ConvergenceFailure("nonlinear solve stalled: no residual decrease along the Picard direction", rn, iter);
      }
      mode = TangentMode::Picard;
      sol.report.picard_used = true;
      emit(opt, iter, rn, 0.0, "stall");
      continue;
    }
    emit(opt, iter, rn, step, mode == TangentMode::Newton ? "newton" : "picard");
    mode = TangentMode::Newton;
  }
  sol.report.iterations = iter;
  sol.report.residual = rn;
  return sol;
}

double dirichlet_energy(const Discretization& disc, const MaterialField& field, const Field& u) {
  if (!u.allFinite()) throw std::invalid_argument("dirichlet_energy: field has non-finite values");
  double total = 0.0;
  for (std::size_t e = 0; e < disc.mesh().num_triangles(); ++e) {
    total += disc.area(e) * field.energy_density(e, disc.gradient(e, u).norm());
  }
  return total;
}

double flux_pairing(const Discretization& disc, const MaterialField& field, const Field& u) {
  double total = 0.0;
  for (std::size_t e = 0; e < disc.mesh().num_triangles(); ++e) {
    const double s = disc.gradient(e, u).norm();
    total += disc.area(e) * field.gamma(e, s) * s * s;
  }
  return total;
}

double dtn_pairing(const Discretization& disc, const MaterialField& field, const BoundaryPotential& f,
                   const SolverOptions& options) {
  return flux_pairing(disc, field, solve_nonlinear_dirichlet(disc, field, f, options).u);
}

double avg_dtn_pairing(const Discretization& disc, const MaterialField& field, const BoundaryPotential& f,
                       const SolverOptions& options) {
  return dirichlet_energy(disc, field, solve_nonlinear_dirichlet(disc, field, f, options).u);
}

double avg_dtn_pairing_quadrature(const Discretization& disc, const MaterialField& field, const BoundaryPotential& f,
                                  int points, const SolverOptions& options) {
  std::vector<double> x, w;
  gauss_legendre_unit(points, x, w);
  double total = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    BoundaryPotential g{f.values, f.scale * x[k]};
    // <Lambda(a f), f> = <Lambda(a f), a f> / a
    total += w[k] * dtn_pairing(disc, field, g, options) / x[k];
  }
  return total;
}

void gauss_legendre_unit(int points, std::vector<double>& nodes, std::vector<double>& weights) {
  if (points < 1) throw std::invalid_argument("gauss_legendre_unit: need at least one point");
  const int n = points;
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    nodes[n - 1 - i] = 0.5 * (z + 1.0);
    weights[n - 1 - i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

DtNMatrix schur_dtn_matrix(const Discretization& disc, const MaterialField& field) {
  const std::vector<double> c = field.linear_coefficients();
  const auto& mesh = disc.mesh();
  for (double v : c) {
    if (!(v > 0.0)) throw std::invalid_argument("schur_dtn_matrix: coefficients must be positive");
  }
  Blocks b = assemble_blocks(disc, [&](std::size_t e, Eigen::Matrix3d& ke) { isotropic_element(disc, e, c[e], ke); });
  const std::size_t nb = disc.num_boundary();
  Eigen::MatrixXd kbb = Eigen::MatrixXd::Zero(nb, nb);
  for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
    const auto& t = mesh.triangles()[e];
    const auto& g = disc.gradients(e);
    for (int a = 0; a < 3; ++a) {
      const int ba = disc.boundary_index(t[a]);
      if (ba < 0) continue;
      for (int d = 0; d < 3; ++d) {
        const int bd = disc.boundary_index(t[d]);
        if (bd >= 0) kbb(ba, bd) += c[e] * disc.area(e) * g[a].dot(g[d]);
      }
    }
  }
  Ldlt solver;
  factorize(solver, b.kii);
  const Eigen::MatrixXd kib = Eigen::MatrixXd(b.kib);
  const Eigen::MatrixXd x = solver.solve(kib);
  if (!x.allFinite()) throw NumericalFailure("Schur complement solve produced non-finite values");
  Eigen::MatrixXd s = kbb - kib.transpose() * x;
  s = 0.5 * (s + s.transpose()).eval();
  return {std::move(s), boundary_mass_matrix(mesh)};
}

void write_field_csv(std::ostream& out, const Mesh& mesh, const Field& u) {
  out << "node,x,y,u\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t v = 0; v < mesh.num_nodes(); ++v) {
    out << v << ',' << mesh.nodes()[v].x() << ',' << mesh.nodes()[v].y() << ',' << u[v] << '\n';
  }
}

}  // namespace monotomo
