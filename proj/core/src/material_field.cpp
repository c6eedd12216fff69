#include <algorithm>
#include <stdexcept>

#include "monotomo/materials.hpp"

namespace monotomo {

MaterialField::MaterialField(std::vector<double> background, ElementMask mask, std::shared_ptr<const MaterialLaw> anomaly,
                             OutsideRule outside)
    : background_(std::move(background)), mask_(std::move(mask)), anomaly_(std::move(anomaly)), outside_(outside) {
  for (double c : background_) {
    if (!(c > 0.0)) throw std::invalid_argument("MaterialField: background coefficients must be positive");
  }
  if (!mask_.empty() && mask_.size() != background_.size()) {
    throw std::invalid_argument("MaterialField: mask size does not match element count");
  }
  if (!mask_.empty() && !anomaly_) {
    bool any = std::any_of(mask_.begin(), mask_.end(), [](std::uint8_t m) { return m != 0; });
    if (any) throw std::invalid_argument("MaterialField: mask given without an anomaly law");
  }
  if (outside_ == OutsideRule::MinWithAnomaly && !anomaly_) {
    throw std::invalid_argument("MaterialField: min rule needs an anomaly law");
  }
}

MaterialField MaterialField::uniform(std::size_t elements, double c) {
  return MaterialField(std::vector<double>(elements, c));
}

MaterialField MaterialField::with_anomaly(std::vector<double> background, ElementMask mask, MaterialLaw anomaly,
                                          OutsideRule outside) {
  return MaterialField(std::move(background), std::move(mask), std::make_shared<const MaterialLaw>(std::move(anomaly)),
                       outside);
}

bool MaterialField::uses_law(std::size_t e) const {
  if (inside(e)) return true;
  return outside_ == OutsideRule::MinWithAnomaly;
}

double MaterialField::gamma(std::size_t e, double s) const {
  if (inside(e)) return anomaly_->gamma(s);
  if (outside_ == OutsideRule::MinWithAnomaly) return std::min(background_[e], anomaly_->gamma(s));
  return background_[e];
}

double MaterialField::dgamma(std::size_t e, double s) const {
  if (inside(e)) return anomaly_->dgamma(s);
  if (outside_ == OutsideRule::MinWithAnomaly && anomaly_->gamma(s) < background_[e]) return anomaly_->dgamma(s);
  return 0.0;
}

double MaterialField::energy_density(std::size_t e, double s) const {
  if (inside(e)) return anomaly_->energy_density(s);
  const double c = background_[e];
  if (outside_ != OutsideRule::MinWithAnomaly) return 0.5 * c * s * s;
  if (anomaly_->is_linear()) return 0.5 * std::min(c, anomaly_->gamma(0.0)) * s * s;
  const auto& law = *anomaly_;
  auto bp = law.breakpoints();
  // Crossings of gamma with c show up as sign changes between panel knots.
  const auto knots = energy_panels(0.0, s, bp);
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    double lo = knots[k], hi = knots[k + 1];
    const bool below_lo = law.gamma(lo) < c;
    if (below_lo == (law.gamma(hi) < c)) continue;
    for (int it = 0; it < 100 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      ((law.gamma(mid) < c) == below_lo ? lo : hi) = mid;
    }
    bp.push_back(0.5 * (lo + hi));
  }
  return integrate_energy([&](double t) { return std::min(c, law.gamma(t)); }, 0.0, s, bp);
}

bool MaterialField::is_linear() const {
  if (!anomaly_ || anomaly_->is_linear()) return true;
  for (std::size_t e = 0; e < background_.size(); ++e) {
    if (uses_law(e)) return false;
  }
  return true;
}

std::vector<double> MaterialField::linear_coefficients() const {
  if (!is_linear()) throw std::logic_error("MaterialField: field is nonlinear");
  std::vector<double> c(background_.size());
  for (std::size_t e = 0; e < c.size(); ++e) c[e] = gamma(e, 0.0);
  return c;
}

}  // namespace monotomo
