#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "monotomo/inversion.hpp"

namespace monotomo::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parsed form of a call expression such as `circle(0.2, 0.1, 0.3)` or
/// `union(circle(...), rect(...))`.
struct Call;
using Arg = std::variant<double, std::string, Call>;
struct Call {
  std::string name;
  std::vector<Arg> args;
};

Call parse_call(const std::string& text);

/// Law expressions:
///   linear(c)  monomial(p[, c])  power-law-ej(E0, Jc, n[, cap])
///   bruggeman(delta1, sigma1, <law>)  saturating(mu_peak, s_peak[, beta[, scale]])
///   tabulated("file.csv")  superconducting-mixture()  steel-surrogate([s_peak])
/// Relative tabulated paths resolve against `base_dir`.
MaterialLaw parse_law(const std::string& text, const std::filesystem::path& base_dir = {});

/// Region expressions, coordinates and lengths in units of the domain radius:
///   circle(x, y, r)  ellipse(x, y, a, b[, rot])  rect(x0, y0, x1, y1)
///   polygon(x1, y1, x2, y2, ...)  union(<region>, ...)  empty()
///   peanut(x, y, s)  kite(x, y, s)  droplet(x, y, s)  hollow(x, y, r_out, r_in)
Region parse_region(const std::string& text, double radius);

struct RunConfig {
  // [scenario]
  Physics physics = Physics::SteadyCurrents;
  double radius = 1.0;
  int rings = 24;
  int measurement_rings = 0;  // 0: measure on the precompute mesh
  double background = 1.0;
  std::string law_text = "linear(1)";
  MaterialLaw law = MaterialLaw::linear(1.0);
  MaterialBounds bounds{1.0, 1.0};
  Regime regime = Regime::Separated;
  double transducer_k = 1.0;
  double s_m = 0.0;
  double s_check = 1e3;
  std::string anomaly_text = "empty()";
  Region anomaly = Region::empty();
  // [grid], [potentials], [solver]
  GridSpec grid;
  PotentialSpec potentials;
  SolverOptions solver;
  // [noise]
  std::string noise_preset = "keithley-2002";
  NoiseModel noise = NoiseModel::keithley_2002(0);
  /// Range guard for lambda; defaults to the largest finite instrument range.
  double max_reading = 0.0;
  // [output]
  std::string out = "out";

  /// Builds meshes and checks the scenario; throws ConfigError listing every
  /// problem found.
  Scenario build_scenario() const;
  PipelineOptions pipeline_options(int jobs) const;
};

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
/// Throws ConfigError when the file is missing or invalid.
RunConfig load_config(const std::filesystem::path& path);

/// Inline trace description for `forward`: "cos:n", "sin:n" or "zero".
std::function<double(double)> parse_trace(const std::string& text);

}  // namespace monotomo::cli
