#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "monotomo/potentials.hpp"

namespace monotomo {

namespace {

// Orthonormal basis of { v : w^T v = 0 }.
Eigen::MatrixXd complement_basis(const Eigen::VectorXd& w) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
  const Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(w.size() - 1);
}

}  // namespace

BoundingLaws build_bounding_laws(const Mesh& mesh, const Region& T, const Region& F, const MaterialBounds& bounds,
                                 const MaterialField& background, Regime regime, double gamma_l) {
  if (background.size() != mesh.num_triangles()) throw std::invalid_argument("background size does not match mesh");
  if (!(bounds.lower > 0.0 && bounds.lower <= bounds.upper)) {
    throw std::invalid_argument("bounds need 0 < c_nl^l <= c_nl^u");
  }
  const auto bg = background.linear_coefficients();
  const double bg_max = *std::max_element(bg.begin(), bg.end());
  double t_value = bounds.lower;
  if (regime == Regime::Separated) {
    if (!(bounds.lower > bg_max)) {
      throw std::invalid_argument("separated regime needs c_nl^l above every background coefficient");
    }
  } else {
    if (!(gamma_l > bg_max)) {
      throw std::invalid_argument("intersecting regime needs gamma_l above every background coefficient");
    }
    if (gamma_l > bounds.upper) throw std::invalid_argument("gamma_l exceeds c_nl^u");
    t_value = gamma_l;
  }
  const ElementMask in_t = classify_elements(mesh, T);
  const ElementMask in_f = classify_elements(mesh, F);
  std::vector<double> fu(bg), tl(bg);
  for (std::size_t e = 0; e < bg.size(); ++e) {
    if (in_f[e]) fu[e] = bounds.upper;
    if (in_t[e]) tl[e] = t_value;
  }
  return {MaterialField(std::move(fu)), MaterialField(std::move(tl))};
}

MaterialField test_anomaly_field(const Mesh& mesh, const Region& T, const MaterialLaw& law,
                                 const MaterialField& background, Regime regime) {
  return MaterialField::with_anomaly(background.linear_coefficients(), classify_elements(mesh, T), law,
                                     regime == Regime::Separated ? OutsideRule::Background
                                                                 : OutsideRule::MinWithAnomaly);
}

std::vector<EigenPair> negative_eigenspace(const DtNMatrix& k_fu, const DtNMatrix& k_tl, int k_max, double eps_rel) {
  const Eigen::Index n = k_fu.k.rows();
  if (k_tl.k.rows() != n || k_fu.mass.rows() != n || k_tl.mass.rows() != n) {
    throw std::invalid_argument("negative_eigenspace: boundary dimensions differ");
  }
  if (n < 2 || k_max <= 0) return {};
  const Eigen::MatrixXd& mass = k_fu.mass;
  const Eigen::MatrixXd z = complement_basis(mass * Eigen::VectorXd::Ones(n));
  const Eigen::MatrixXd diff = k_fu.k - k_tl.k;
  Eigen::MatrixXd a = z.transpose() * diff * z;
  a = 0.5 * (a + a.transpose()).eval();
  Eigen::MatrixXd b = z.transpose() * mass * z;
  b = 0.5 * (b + b.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, b);
  if (solver.info() != Eigen::Success) throw NumericalFailure("generalized eigensolver failed");
  const Eigen::VectorXd& vals = solver.eigenvalues();  // ascending
  const double eps = eps_rel * diff.selfadjointView<Eigen::Lower>().operatorNorm();
  std::vector<EigenPair> out;
  for (Eigen::Index k = 0; k < vals.size() && static_cast<int>(out.size()) < k_max; ++k) {
    if (!(vals[k] < -eps)) break;
    Eigen::VectorXd v = z * solver.eigenvectors().col(k);
    v /= std::sqrt(v.dot(mass * v));
    // Fix the sign so runs are reproducible across eigensolver versions.
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    out.push_back({vals[k], std::move(v)});
  }
  return out;
}

double c0_of_combination(const std::vector<EigenPair>& pairs, const std::vector<double>& betas,
                         const Eigen::MatrixXd& mass) {
  if (pairs.size() != betas.size()) throw std::invalid_argument("c0_of_combination: one beta per pair");
  if (std::all_of(betas.begin(), betas.end(), [](double b) { return b == 0.0; })) {
    throw std::invalid_argument("c0_of_combination: all betas are zero");
  }
  double c0 = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (!(pairs[k].delta < 0.0)) throw std::invalid_argument("c0_of_combination: eigenvalues must be negative");
    c0 += pairs[k].delta * betas[k] * betas[k] * pairs[k].v.dot(mass * pairs[k].v);
  }
  return 0.5 * c0;
}

ScalingResult select_scaling(const Discretization& disc, const Eigen::VectorXd& f, const MaterialField& t_field,
                             const Eigen::MatrixXd& k_tl, double c0, double alpha, double lambda_init,
                             const SolverOptions& options) {
  if (!(c0 < 0.0)) throw std::invalid_argument("select_scaling: c0 must be negative");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("select_scaling: alpha must lie in (0, 1)");
  if (!(lambda_init > 0.0)) throw std::invalid_argument("select_scaling: lambda_init must be positive");
  const double eps = alpha * std::abs(c0);
  const double target = 0.5 * f.dot(k_tl * f) - eps;
  double lambda = lambda_init;
  for (int m = 0; m <= 60; ++m, lambda *= 0.5) {
    double energy;
    try {
      energy = avg_dtn_pairing(disc, t_field, BoundaryPotential{f, lambda}, options);
    } catch (const ConvergenceFailure&) {
      continue;
    }
    if (energy / (lambda * lambda) >= target) return {lambda, energy, m};
  }
  throw SelectionFailure("no admissible scaling factor within 60 halvings");
}

PairOutcome synthesize_pair(const Discretization& disc, const DtNMatrix& k_fu, const DtNMatrix& k_tl,
                            const MaterialField& t_field, const PotentialSpec& spec, int i, int j,
                            const std::function<double(const Eigen::VectorXd&)>& initial_lambda,
                            const SolverOptions& options) {
  PairOutcome out;
  const auto pairs = negative_eigenspace(k_fu, k_tl, spec.k_max, spec.eps_eig);
  if (pairs.empty()) return out;
  const Eigen::MatrixXd& mass = k_fu.mass;
  const Eigen::MatrixXd diff = k_fu.k - k_tl.k;

  std::vector<std::pair<Eigen::VectorXd, double>> candidates;  // (trace, most negative delta)
  for (const auto& p : pairs) candidates.emplace_back(p.v, p.delta);
  if (pairs.size() > 1) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(pairs.front().v.size());
    for (const auto& p : pairs) sum += p.v;
    sum /= std::sqrt(sum.dot(mass * sum));
    candidates.emplace_back(std::move(sum), pairs.front().delta);
  }
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    TestPotential tp;
    tp.trace = std::move(candidates[k].first);
    tp.delta = candidates[k].second;
    tp.c0 = 0.5 * tp.trace.dot(diff * tp.trace);
    tp.i = i;
    tp.j = j;
    tp.k = static_cast<int>(k);
    if (!(tp.c0 < 0.0)) {
      ++out.selection_failures;
      continue;
    }
    try {
      const double lambda_init = initial_lambda ? initial_lambda(tp.trace) : spec.lambda_init;
      const ScalingResult s = select_scaling(disc, tp.trace, t_field, k_tl.k, tp.c0, spec.alpha, lambda_init, options);
      tp.lambda = s.lambda;
      tp.response = s.energy;
    } catch (const SelectionFailure&) {
      ++out.selection_failures;
      continue;
    }
    out.potentials.push_back(std::move(tp));
  }
  return out;
}

}  // namespace monotomo
