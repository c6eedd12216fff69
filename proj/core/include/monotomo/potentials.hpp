#pragma once

#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "monotomo/fem.hpp"
#include "monotomo/geometry.hpp"
#include "monotomo/materials.hpp"

namespace monotomo {

/// Whether the nonlinear law's range is disjoint from the background value
/// (separated) or crosses it (intersecting, handled below an operating cap).
enum class Regime { Separated, Intersecting };

struct BoundingLaws {
  MaterialField gamma_F_u;  // c_nl^u on F, background elsewhere
  MaterialField gamma_T_l;  // c_nl^l (or gamma_l) on T, background elsewhere
};

/// `background` must be linear. In the intersecting regime `gamma_l` replaces
/// c_nl^l on T and must exceed the largest background coefficient.
BoundingLaws build_bounding_laws(const Mesh& mesh, const Region& T, const Region& F, const MaterialBounds& bounds,
                                 const MaterialField& background, Regime regime, double gamma_l = 0.0);

/// Test-anomaly field: gamma_nl on T; outside T either the background or
/// min(background, gamma_nl) depending on the regime.
MaterialField test_anomaly_field(const Mesh& mesh, const Region& T, const MaterialLaw& law,
                                 const MaterialField& background, Regime regime);

struct EigenPair {
  double delta;
  Eigen::VectorXd v;  // unit M-norm, M-orthogonal to constants
};

/// Most negative generalized eigenpairs of (K_Fu - K_Tl) v = delta M v on the
/// zero-mean subspace, ascending. Eigenvalues above -eps_rel * ||K_Fu - K_Tl||_2 are
/// dropped.
std::vector<EigenPair> negative_eigenspace(const DtNMatrix& k_fu, const DtNMatrix& k_tl, int k_max,
                                           double eps_rel = 1e-10);

/// c0 = 1/2 sum_k delta_k beta_k^2 ||phi_k||_M^2.
double c0_of_combination(const std::vector<EigenPair>& pairs, const std::vector<double>& betas,
                         const Eigen::MatrixXd& mass);

struct ScalingResult {
  double lambda;
  double energy;  // <avg Lambda_T(lambda f), lambda f> at the accepted lambda
  int halvings;
};

/// Largest lambda = lambda_init 2^-m (m <= 60) with
///   <avg Lambda_T(lambda f), lambda f> / lambda^2 >= 1/2 f^T K_Tl f - alpha |c0|.
/// Throws SelectionFailure when none qualifies.
ScalingResult select_scaling(const Discretization& disc, const Eigen::VectorXd& f, const MaterialField& t_field,
                             const Eigen::MatrixXd& k_tl, double c0, double alpha, double lambda_init,
                             const SolverOptions& options = {});

struct TestPotential {
  Eigen::VectorXd trace;  // unit M-norm, zero mean
  double delta = 0.0;     // most negative eigenvalue in the combination
  double c0 = 0.0;
  double lambda = 0.0;
  int i = 0;  // test anomaly
  int j = 0;  // fictitious anomaly
  int k = 0;  // eigenfunction index; k == number of pairs marks the sum
  /// Test-anomaly response found while selecting lambda; NaN when unknown.
  double response = std::numeric_limits<double>::quiet_NaN();

  BoundaryPotential scaled() const { return {trace, lambda}; }
};

struct PotentialSpec {
  int directions = 4;
  bool convex = true;
  bool concave = true;
  int k_max = 3;
  double alpha = 0.5;
  double lambda_init = 1.0;
  double eps_eig = 1e-10;
};

struct PairOutcome {
  std::vector<TestPotential> potentials;
  int selection_failures = 0;
};

/// Separating potentials for one (T_i, F_j) pair: each negative eigenfunction
/// and, when there are several, their unit-coefficient sum.
/// `initial_lambda(f)` overrides spec.lambda_init per trace when given.
PairOutcome synthesize_pair(const Discretization& disc, const DtNMatrix& k_fu, const DtNMatrix& k_tl,
                            const MaterialField& t_field, const PotentialSpec& spec, int i, int j,
                            const std::function<double(const Eigen::VectorXd&)>& initial_lambda = {},
                            const SolverOptions& options = {});

enum class FictitiousStyle { ConvexTangent, ConcavePair };

/// Half-planes beyond tangent lines of T (convex-tangent) or unions of two of
/// them a quarter turn apart (concave-pair). Each region is disjoint from T.
/// Half-planes that miss the domain are omitted.
std::vector<Region> fictitious_anomalies(const Region& T, const Mesh& domain, FictitiousStyle style, int directions);

}  // namespace monotomo
