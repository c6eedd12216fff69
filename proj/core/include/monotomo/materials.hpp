#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "monotomo/geometry.hpp"

namespace monotomo {

inline constexpr double kMu0 = 4.0e-7 * 3.14159265358979323846;

/// Constitutive law gamma(s), s = |grad u|.
///
/// Laws are immutable values; nested laws are shared. `gamma` and `dgamma`
/// are reentrant.
class MaterialLaw {
 public:
  struct Linear {
    double c;
  };
  /// E-J power law conductivity sigma(E) = (Jc/E0) (E/E0)^((1-n)/n), held
  /// constant at `cap` below the field where it reaches `cap`.
  struct PowerLawEJ {
    double e0;
    double jc;
    double n;
    double cap;
  };
  /// Monotone cubic Hermite interpolant through (s, gamma) samples, constant
  /// outside the sampled range.
  struct Tabulated {
    std::vector<double> s;
    std::vector<double> gamma;
    std::vector<double> slope;  // Fritsch-Carlson node derivatives
  };
  /// Bruggeman two-phase mixture: a linear host (sigma1, fraction delta1)
  /// and a field-dependent inclusion phase.
  struct Bruggeman {
    double delta1;
    double sigma1;
    std::shared_ptr<const MaterialLaw> inner;
  };
  /// gamma(s) = coefficient * s^(p-2); the p-Laplacian family.
  struct Monomial {
    double p;
    double coefficient;
  };
  /// Saturating permeability surrogate (non-measured data):
  ///   mu(s) = scale * (1 + (mu_peak - 1) h(x) / h(x*)),  x = s / s_peak,
  ///   h(x) = (beta + 2x) / (1 + x^2),
  /// where x* maximizes h. mu(0) is the initial permeability.
  struct Saturating {
    double mu_peak;
    double s_peak;
    double beta;
    double scale;
  };
  /// Arbitrary law given by callables. Used for constructed test cases.
  struct Custom {
    std::function<double(double)> gamma;
    std::function<double(double)> dgamma;
    std::string name;
  };
  using Variant = std::variant<Linear, PowerLawEJ, Tabulated, Bruggeman, Monomial, Saturating, Custom>;

  static MaterialLaw linear(double c);
  /// Cap defaults to the value used for the superconducting mixture:
  /// 1e3 * 55.5e6 S/m.
  static MaterialLaw power_law_ej(double e0, double jc, double n, double cap = 1e3 * 55.5e6);
  static MaterialLaw tabulated(std::vector<std::pair<double, double>> samples);
  static MaterialLaw bruggeman(double delta1, double sigma1, MaterialLaw inner);
  static MaterialLaw monomial(double p, double coefficient = 1.0);
  static MaterialLaw saturating(double mu_peak, double s_peak, double beta = 0.1, double scale = kMu0);
  static MaterialLaw custom(std::function<double(double)> gamma, std::function<double(double)> dgamma,
                            std::string name = "custom");

  /// gamma(s); throws std::invalid_argument for s < 0.
  double gamma(double s) const;
  /// d gamma / ds (one-sided at kinks).
  double dgamma(double s) const;
  /// Q(s) = int_0^s gamma(eta) eta d eta.
  double energy_density(double s) const;

  bool is_linear() const { return std::holds_alternative<Linear>(shape_); }
  /// Abscissae where gamma is not smooth; quadrature splits there.
  std::vector<double> breakpoints() const;
  /// Largest s0 with gamma constant on [0, s0] (0 if none known, inf if linear).
  double constant_below() const;
  std::string describe() const;

  const Variant& shape() const { return shape_; }

 private:
  explicit MaterialLaw(Variant v) : shape_(std::move(v)) {}
  Variant shape_;
};

/// Loads a tabulated law from two-column CSV (s, gamma). A non-numeric first
/// line is treated as a header. s must be strictly increasing.
MaterialLaw read_tabulated_csv(std::istream& in);

/// Positive root of the Bruggeman equation
///   d1 (s1 - se)/(s1 + 2 se) + d2 (s2 - se)/(s2 + 2 se) = 0,  d2 = 1 - d1.
double bruggeman_effective(double sigma1, double sigma2, double delta1);
/// d sigma_e / d sigma2 at fixed sigma1, delta1.
double bruggeman_dsigma2(double sigma1, double sigma2, double delta1);

/// Knots for integrating over [a, b]: split at breakpoints, then into panels
/// whose endpoint ratio is at most e. Panels touching 0 shrink geometrically
/// down to b * e^-8, followed by one panel [0, b * e^-8].
std::vector<double> energy_panels(double a, double b, const std::vector<double>& breakpoints = {});

/// int_a^b gamma(t) t dt by 16-point Gauss-Legendre on each energy panel.
double integrate_energy(const std::function<double(double)>& gamma, double a, double b,
                        const std::vector<double>& breakpoints = {});

struct MaterialBounds {
  double lower;
  double upper;
};

struct AssumptionReport {
  bool h2_ok;                  // gamma(s) s strictly increasing on the grid
  MaterialBounds h3_bounds;    // empirical min / max of gamma
  double h4_kappa_estimate;    // minimal slope of gamma(s) s
};

AssumptionReport verify_assumptions(const MaterialLaw& law, double s_max, int grid_size);

/// Smallest s in [0, s_max] with gamma(s) = c_bg_upper, if any.
std::optional<double> intersection_s0(const MaterialLaw& law, double c_bg_upper, double s_max,
                                      int grid_size = 20000);

/// min of gamma over [0, s_m].
double lower_bound_on_range(const MaterialLaw& law, double s_m, int grid_size = 4001);

/// How a material field treats elements outside its anomaly mask.
enum class OutsideRule {
  Background,      // gamma = gamma_bg(x)
  MinWithAnomaly,  // gamma = min(gamma_bg(x), gamma_nl(s))
};

/// Piecewise material property on mesh elements: a linear background per
/// element and an optional law on the masked elements.
class MaterialField {
 public:
  MaterialField(std::vector<double> background, ElementMask mask = {},
                std::shared_ptr<const MaterialLaw> anomaly = nullptr,
                OutsideRule outside = OutsideRule::Background);

  static MaterialField uniform(std::size_t elements, double c);
  static MaterialField with_anomaly(std::vector<double> background, ElementMask mask, MaterialLaw anomaly,
                                    OutsideRule outside = OutsideRule::Background);

  std::size_t size() const { return background_.size(); }
  double gamma(std::size_t e, double s) const;
  double dgamma(std::size_t e, double s) const;
  double energy_density(std::size_t e, double s) const;

  /// True when every element coefficient is independent of s.
  bool is_linear() const;
  /// Element coefficients of a linear field; throws std::logic_error otherwise.
  std::vector<double> linear_coefficients() const;

  const std::vector<double>& background() const { return background_; }
  const ElementMask& mask() const { return mask_; }
  const std::shared_ptr<const MaterialLaw>& anomaly() const { return anomaly_; }
  OutsideRule outside_rule() const { return outside_; }

 private:
  bool inside(std::size_t e) const { return !mask_.empty() && mask_[e] != 0; }
  bool uses_law(std::size_t e) const;

  std::vector<double> background_;
  ElementMask mask_;
  std::shared_ptr<const MaterialLaw> anomaly_;
  OutsideRule outside_;
};

/// Ships-with laws for the two reference scenarios.
namespace laws {
/// Bruggeman mixture of an Ag-Mg host (55.5 MS/m, fraction 0.668) with
/// Bi-2212 E-J power-law inclusions (E0 = 1e-4 V/m, Jc = 8e9 A/m^2, n = 27).
MaterialLaw superconducting_mixture();
/// Synthetic saturating steel surrogate peaking at mu_r = 8000. Not measured
/// M330-50A data.
MaterialLaw steel_surrogate(double s_peak = 50.0);
}  // namespace laws

}  // namespace monotomo
