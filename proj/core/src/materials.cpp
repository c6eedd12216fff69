#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "monotomo/materials.hpp"

namespace monotomo {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double power_law_cap_field(const MaterialLaw::PowerLawEJ& p) {
  const double q = (1.0 - p.n) / p.n;
  return p.e0 * std::pow(p.cap * p.e0 / p.jc, 1.0 / q);
}

double saturating_h(double beta, double x) { return (beta + 2.0 * x) / (1.0 + x * x); }

double saturating_hmax(double beta) {
  const double x = 0.5 * (-beta + std::sqrt(beta * beta + 4.0));
  return saturating_h(beta, x);
}

// Hermite interval lookup for tabulated laws; returns the left knot index.
std::size_t knot_interval(const std::vector<double>& s, double x) {
  auto it = std::upper_bound(s.begin(), s.end(), x);
  std::size_t k = static_cast<std::size_t>(std::distance(s.begin(), it));
  return k == 0 ? 0 : std::min(k - 1, s.size() - 2);
}

double tabulated_value(const MaterialLaw::Tabulated& t, double x) {
  if (x <= t.s.front()) return t.gamma.front();
  if (x >= t.s.back()) return t.gamma.back();
  const std::size_t k = knot_interval(t.s, x);
  const double h = t.s[k + 1] - t.s[k];
  const double u = (x - t.s[k]) / h;
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * t.gamma[k] + (u3 - 2 * u2 + u) * h * t.slope[k] +
         (-2 * u3 + 3 * u2) * t.gamma[k + 1] + (u3 - u2) * h * t.slope[k + 1];
}

double tabulated_derivative(const MaterialLaw::Tabulated& t, double x) {
  if (x < t.s.front() || x >= t.s.back()) return 0.0;
  const std::size_t k = knot_interval(t.s, x);
  const double h = t.s[k + 1] - t.s[k];
  const double u = (x - t.s[k]) / h;
  const double u2 = u * u;
  return ((6 * u2 - 6 * u) * t.gamma[k] + (-6 * u2 + 6 * u) * t.gamma[k + 1]) / h +
         (3 * u2 - 4 * u + 1) * t.slope[k] + (3 * u2 - 2 * u) * t.slope[k + 1];
}

double bruggeman_residual(double s1, double s2, double d1, double se) {
  const double d2 = 1.0 - d1;
  return d1 * (s1 - se) / (s1 + 2.0 * se) + d2 * (s2 - se) / (s2 + 2.0 * se);
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction

MaterialLaw MaterialLaw::linear(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("linear law needs a positive coefficient");
  return MaterialLaw(Linear{c});
}

MaterialLaw MaterialLaw::power_law_ej(double e0, double jc, double n, double cap) {
  if (!(e0 > 0.0 && jc > 0.0 && n > 1.0 && cap > 0.0)) {
    throw std::invalid_argument("power law needs E0 > 0, Jc > 0, n > 1 and a positive cap");
  }
  return MaterialLaw(PowerLawEJ{e0, jc, n, cap});
}

MaterialLaw MaterialLaw::tabulated(std::vector<std::pair<double, double>> samples) {
  if (samples.size() < 2) throw std::invalid_argument("tabulated law needs at least two samples");
  Tabulated t;
  for (const auto& [s, g] : samples) {
    if (!(g > 0.0)) throw std::invalid_argument("tabulated gamma must be positive");
    if (!t.s.empty() && !(s > t.s.back())) throw std::invalid_argument("tabulated s must be strictly increasing");
    if (s < 0.0) throw std::invalid_argument("tabulated s must be nonnegative");
    t.s.push_back(s);
    t.gamma.push_back(g);
  }
  // Fritsch-Butland weighted harmonic mean slopes; zero at local extrema.
  const std::size_t n = t.s.size();
  t.slope.assign(n, 0.0);
  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = t.s[k + 1] - t.s[k];
    d[k] = (t.gamma[k + 1] - t.gamma[k]) / h[k];
  }
  t.slope[0] = d[0];
  t.slope[n - 1] = d[n - 2];
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (d[k - 1] * d[k] <= 0.0) continue;
    const double w1 = 2.0 * h[k] + h[k - 1];
    const double w2 = h[k] + 2.0 * h[k - 1];
    t.slope[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
  }
  // End slopes limited so the end intervals stay monotone.
  for (std::size_t k : {std::size_t{0}, n - 1}) {
    const double dk = k == 0 ? d[0] : d[n - 2];
    if (t.slope[k] * dk <= 0.0) t.slope[k] = 0.0;
    if (std::abs(t.slope[k]) > 3.0 * std::abs(dk)) t.slope[k] = 3.0 * dk;
  }
  return MaterialLaw(std::move(t));
}

MaterialLaw MaterialLaw::bruggeman(double delta1, double sigma1, MaterialLaw inner) {
  if (!(delta1 >= 0.0 && delta1 <= 1.0)) throw std::invalid_argument("volume fraction must lie in [0, 1]");
  if (!(sigma1 > 0.0)) throw std::invalid_argument("host conductivity must be positive");
  return MaterialLaw(Bruggeman{delta1, sigma1, std::make_shared<const MaterialLaw>(std::move(inner))});
}

MaterialLaw MaterialLaw::monomial(double p, double coefficient) {
  if (!(p > 1.0) || !(coefficient > 0.0)) throw std::invalid_argument("monomial law needs p > 1 and c > 0");
  return MaterialLaw(Monomial{p, coefficient});
}

MaterialLaw MaterialLaw::saturating(double mu_peak, double s_peak, double beta, double scale) {
  if (!(mu_peak > 1.0 && s_peak > 0.0 && beta > 0.0 && scale > 0.0)) {
    throw std::invalid_argument("saturating law needs mu_peak > 1 and positive s_peak, beta, scale");
  }
  return MaterialLaw(Saturating{mu_peak, s_peak, beta, scale});
}

MaterialLaw MaterialLaw::custom(std::function<double(double)> gamma, std::function<double(double)> dgamma,
                                std::string name) {
  if (!gamma) throw std::invalid_argument("custom law needs a gamma callable");
  return MaterialLaw(Custom{std::move(gamma), std::move(dgamma), std::move(name)});
}

// ---------------------------------------------------------------------------
// Evaluation

double MaterialLaw::gamma(double s) const {
  if (s < 0.0 || std::isnan(s)) throw std::invalid_argument("gamma: field magnitude must be nonnegative");
  return std::visit(
      Overloaded{
          [&](const Linear& l) { return l.c; },
          [&](const PowerLawEJ& p) {
            const double v = (p.jc / p.e0) * std::pow(s / p.e0, (1.0 - p.n) / p.n);
            return std::min(v, p.cap);
          },
          [&](const Tabulated& t) { return tabulated_value(t, s); },
          [&](const Bruggeman& b) { return bruggeman_effective(b.sigma1, b.inner->gamma(s), b.delta1); },
          [&](const Monomial& m) { return m.coefficient * std::pow(s, m.p - 2.0); },
          [&](const Saturating& m) {
            const double x = s / m.s_peak;
            return m.scale * (1.0 + (m.mu_peak - 1.0) * saturating_h(m.beta, x) / saturating_hmax(m.beta));
          },
          [&](const Custom& c) { return c.gamma(s); },
      },
      shape_);
}

double MaterialLaw::dgamma(double s) const {
  if (s < 0.0 || std::isnan(s)) throw std::invalid_argument("dgamma: field magnitude must be nonnegative");
  return std::visit(
      Overloaded{
          [&](const Linear&) { return 0.0; },
          [&](const PowerLawEJ& p) {
            if (s <= power_law_cap_field(p)) return 0.0;
            const double q = (1.0 - p.n) / p.n;
            return (p.jc / p.e0) * q * std::pow(s / p.e0, q - 1.0) / p.e0;
          },
          [&](const Tabulated& t) { return tabulated_derivative(t, s); },
          [&](const Bruggeman& b) {
            const double s2 = b.inner->gamma(s);
            return bruggeman_dsigma2(b.sigma1, s2, b.delta1) * b.inner->dgamma(s);
          },
          [&](const Monomial& m) {
            if (m.p == 2.0) return 0.0;
            return m.coefficient * (m.p - 2.0) * std::pow(s, m.p - 3.0);
          },
          [&](const Saturating& m) {
            const double x = s / m.s_peak;
            const double den = 1.0 + x * x;
            const double dh = (2.0 - 2.0 * m.beta * x - 2.0 * x * x) / (den * den);
            return m.scale * (m.mu_peak - 1.0) / saturating_hmax(m.beta) * dh / m.s_peak;
          },
          [&](const Custom& c) {
            if (c.dgamma) return c.dgamma(s);
            const double h = 1e-7 * std::max(s, 1e-7);
            return (c.gamma(s + h) - c.gamma(std::max(s - h, 0.0))) / (s + h - std::max(s - h, 0.0));
          },
      },
      shape_);
}

double MaterialLaw::energy_density(double s) const {
  if (s < 0.0 || std::isnan(s)) throw std::invalid_argument("energy_density: field magnitude must be nonnegative");
  if (s == 0.0) return 0.0;
  return std::visit(
      Overloaded{
          [&](const Linear& l) { return 0.5 * l.c * s * s; },
          [&](const PowerLawEJ& p) {
            const double sc = power_law_cap_field(p);
            if (s <= sc) return 0.5 * p.cap * s * s;
            const double e = 1.0 / p.n + 1.0;
            return 0.5 * p.cap * sc * sc + p.jc * p.e0 * (std::pow(s / p.e0, e) - std::pow(sc / p.e0, e)) / e;
          },
          [&](const Monomial& m) { return m.coefficient * std::pow(s, m.p) / m.p; },
          [&](const Saturating& m) {
            const double x = s / m.s_peak;
            const double c = (m.mu_peak - 1.0) / saturating_hmax(m.beta);
            const double tail = 0.5 * m.beta * std::log1p(x * x) + 2.0 * (x - std::atan(x));
            return m.scale * (0.5 * s * s + c * m.s_peak * m.s_peak * tail);
          },
          [&](const auto&) {
            const double sc = std::min(constant_below(), s);
            const double head = 0.5 * gamma(0.0) * sc * sc;
            return head + integrate_energy([this](double t) { return gamma(t); }, sc, s, breakpoints());
          },
      },
      shape_);
}

double MaterialLaw::constant_below() const {
  return std::visit(Overloaded{
                        [&](const Linear&) { return std::numeric_limits<double>::infinity(); },
                        [&](const PowerLawEJ& p) { return power_law_cap_field(p); },
                        [&](const Bruggeman& b) { return b.inner->constant_below(); },
                        [&](const auto&) { return 0.0; },
                    },
                    shape_);
}

std::vector<double> MaterialLaw::breakpoints() const {
  return std::visit(Overloaded{
                        [&](const PowerLawEJ& p) { return std::vector<double>{power_law_cap_field(p)}; },
                        [&](const Tabulated& t) { return t.s; },
                        [&](const Bruggeman& b) { return b.inner->breakpoints(); },
                        [&](const auto&) { return std::vector<double>{}; },
                    },
                    shape_);
}

std::string MaterialLaw::describe() const {
  std::ostringstream os;
  os.precision(10);
  std::visit(Overloaded{
                 [&](const Linear& l) { os << "linear(" << l.c << ")"; },
                 [&](const PowerLawEJ& p) {
                   os << "power-law-ej(E0=" << p.e0 << ", Jc=" << p.jc << ", n=" << p.n << ", cap=" << p.cap << ")";
                 },
                 [&](const Tabulated& t) { os << "tabulated(" << t.s.size() << " samples)"; },
                 [&](const Bruggeman& b) {
                   os << "bruggeman(delta1=" << b.delta1 << ", sigma1=" << b.sigma1 << ", " << b.inner->describe()
                      << ")";
                 },
                 [&](const Monomial& m) { os << "monomial(p=" << m.p << ", c=" << m.coefficient << ")"; },
                 [&](const Saturating& m) {
                   os << "saturating-surrogate(mu_peak=" << m.mu_peak << ", s_peak=" << m.s_peak
                      << ", beta=" << m.beta << ", scale=" << m.scale << ")";
                 },
                 [&](const Custom& c) { os << c.name; },
             },
             shape_);
  return os.str();
}

MaterialLaw read_tabulated_csv(std::istream& in) {
  std::vector<std::pair<double, double>> samples;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double s = 0.0, g = 0.0;
    if (!(row >> s >> g)) {
      if (first) {
        first = false;
        continue;
      }
      throw std::runtime_error("tabulated CSV: malformed row '" + line + "'");
    }
    first = false;
    samples.emplace_back(s, g);
  }
  return MaterialLaw::tabulated(std::move(samples));
}

// ---------------------------------------------------------------------------
// Bruggeman

double bruggeman_effective(double sigma1, double sigma2, double delta1) {
  if (!(sigma1 > 0.0) || !(sigma2 >= 0.0) || !(delta1 >= 0.0 && delta1 <= 1.0)) {
    throw std::invalid_argument("bruggeman_effective: need sigma1 > 0, sigma2 >= 0, 0 <= delta1 <= 1");
  }
  const double delta2 = 1.0 - delta1;
  // 2 se^2 - b se - s1 s2 = 0
  const double b = delta1 * (2.0 * sigma1 - sigma2) + delta2 * (2.0 * sigma2 - sigma1);
  const double disc = std::sqrt(b * b + 8.0 * sigma1 * sigma2);
  double se = b >= 0.0 ? 0.25 * (b + disc) : 2.0 * sigma1 * sigma2 / (disc - b);
  if (sigma2 == 0.0) return std::max(se, 0.0);

  const double lo = std::min(sigma1, sigma2), hi = std::max(sigma1, sigma2);
  const double scale = delta1 + delta2;
  if (!std::isfinite(se) || se <= 0.0 || std::abs(bruggeman_residual(sigma1, sigma2, delta1, se)) > 1e-12 * scale) {
    // Residual is decreasing in se; bisect on the phase interval.
    double a = lo, c = hi;
    for (int it = 0; it < 200 && c - a > 1e-15 * hi; ++it) {
      const double m = 0.5 * (a + c);
      (bruggeman_residual(sigma1, sigma2, delta1, m) > 0.0 ? a : c) = m;
    }
    se = 0.5 * (a + c);
  }
  if (!std::isfinite(se) || se <= 0.0) throw std::logic_error("bruggeman_effective: no positive root");
  return se;
}

double bruggeman_dsigma2(double sigma1, double sigma2, double delta1) {
  const double delta2 = 1.0 - delta1;
  const double b = delta1 * (2.0 * sigma1 - sigma2) + delta2 * (2.0 * sigma2 - sigma1);
  const double disc = std::sqrt(b * b + 8.0 * sigma1 * sigma2);
  const double se = bruggeman_effective(sigma1, sigma2, delta1);
  return (se * (2.0 * delta2 - delta1) + sigma1) / disc;
}

// ---------------------------------------------------------------------------
// Quadrature and checks

std::vector<double> energy_panels(double a, double b, const std::vector<double>& breakpoints) {
  if (!(a >= 0.0 && b >= a)) throw std::invalid_argument("energy_panels: need 0 <= a <= b");
  std::vector<double> knots{a};
  for (double x : breakpoints) {
    if (x > a && x < b) knots.push_back(x);
  }
  std::sort(knots.begin(), knots.end());
  knots.push_back(b);
  std::vector<double> out{a};
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    double lo = knots[k];
    const double hi = knots[k + 1];
    if (!(hi > lo)) continue;
    if (lo == 0.0) {
      lo = hi * std::exp(-8.0);
      out.push_back(lo);
    }
    const int n = std::max(1, static_cast<int>(std::ceil(std::log(hi / lo))));
    const double ratio = std::pow(hi / lo, 1.0 / n);
    for (int m = 1; m < n; ++m) out.push_back(lo * std::pow(ratio, m));
    out.push_back(hi);
  }
  return out;
}

double integrate_energy(const std::function<double(double)>& gamma, double a, double b,
                        const std::vector<double>& breakpoints) {
  if (!(b > a)) return 0.0;
  const auto knots = energy_panels(a, b, breakpoints);
  auto integrand = [&](double t) { return gamma(t) * t; };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    total += boost::math::quadrature::gauss<double, 16>::integrate(integrand, knots[k], knots[k + 1]);
  }
  return total;
}

AssumptionReport verify_assumptions(const MaterialLaw& law, double s_max, int grid_size) {
  if (!(s_max > 0.0) || grid_size < 2) throw std::invalid_argument("verify_assumptions: need s_max > 0, grid >= 2");
  AssumptionReport report{true, {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()},
                          std::numeric_limits<double>::infinity()};
  const double h = s_max / (grid_size - 1);
  double prev_flux = 0.0;
  for (int k = 0; k < grid_size; ++k) {
    const double s = k * h;
    const double g = law.gamma(s);
    report.h3_bounds.lower = std::min(report.h3_bounds.lower, g);
    report.h3_bounds.upper = std::max(report.h3_bounds.upper, g);
    const double flux = g * s;
    if (k > 0) {
      if (!(flux > prev_flux)) report.h2_ok = false;
      report.h4_kappa_estimate = std::min(report.h4_kappa_estimate, (flux - prev_flux) / h);
    }
    prev_flux = flux;
  }
  return report;
}

std::optional<double> intersection_s0(const MaterialLaw& law, double c_bg_upper, double s_max, int grid_size) {
  if (!(s_max > 0.0) || grid_size < 2) throw std::invalid_argument("intersection_s0: need s_max > 0, grid >= 2");
  auto f = [&](double s) { return law.gamma(s) - c_bg_upper; };
  const double h = s_max / (grid_size - 1);
  double a = 0.0, fa = f(0.0);
  if (fa == 0.0) return 0.0;
  for (int k = 1; k < grid_size; ++k) {
    double b = k == grid_size - 1 ? s_max : k * h;
    const double fb = f(b);
    if (fb == 0.0) return b;
    if ((fa > 0.0) != (fb > 0.0)) {
      const double tol = 1e-12 * s_max;
      while (b - a > tol) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      return 0.5 * (a + b);
    }
    a = b;
    fa = fb;
  }
  return std::nullopt;
}

double lower_bound_on_range(const MaterialLaw& law, double s_m, int grid_size) {
  if (!(s_m > 0.0) || grid_size < 3) throw std::invalid_argument("lower_bound_on_range: need s_M > 0");
  const double h = s_m / (grid_size - 1);
  int best = 0;
  double best_val = law.gamma(0.0);
  for (int k = 1; k < grid_size; ++k) {
    const double v = law.gamma(k == grid_size - 1 ? s_m : k * h);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  // Golden-section refinement on the bracketing cells.
  double a = std::max(0.0, (best - 1) * h), b = std::min(s_m, (best + 1) * h);
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = law.gamma(x1), f2 = law.gamma(x2);
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(s_m, 1.0); ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = law.gamma(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = law.gamma(x2);
    }
  }
  return std::min({best_val, f1, f2});
}

// ---------------------------------------------------------------------------
// Shipped laws

namespace laws {

MaterialLaw superconducting_mixture() {
  constexpr double sigma1 = 55.5e6;
  return MaterialLaw::bruggeman(0.668, sigma1, MaterialLaw::power_law_ej(1e-4, 8e9, 27.0, 1e3 * sigma1));
}

MaterialLaw steel_surrogate(double s_peak) { return MaterialLaw::saturating(8000.0, s_peak, 0.1, kMu0); }

}  // namespace laws

}  // namespace monotomo
