#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "config.hpp"
#include "monotomo/artifacts.hpp"

namespace monotomo::cli {

namespace fs = std::filesystem;

namespace {

struct Loaded {
  RunConfig config;
  Scenario scenario;
  fs::path out;
};

Loaded load(const CommonOptions& opt) {
  Loaded l{load_config(opt.config), {}, {}};
  if (opt.seed) l.config.noise.seed = *opt.seed;
  l.scenario = l.config.build_scenario();
  l.out = opt.out ? *opt.out : fs::path(l.config.out);
  fs::create_directories(l.out);
  return l;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

PipelineOptions options_for(const Loaded& l, const CommonOptions& opt) {
  PipelineOptions o = l.config.pipeline_options(opt.jobs);
  if (!opt.quiet) o.progress = [](const std::string& m) { std::cerr << m << std::endl; };
  return o;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Entries that must agree between the precompute and the reconstruct config.
std::map<std::string, std::string> geometry_header(const RunConfig& c) {
  return {{"radius", fmt(c.radius)},
          {"rings", std::to_string(c.rings)},
          {"grid", std::to_string(c.grid.n)},
          {"roi", fmt(c.grid.roi_fraction)},
          {"law", c.law.describe()},
          {"background", fmt(c.background)},
          {"bounds", fmt(c.bounds.lower) + " " + fmt(c.bounds.upper)},
          {"regime", c.regime == Regime::Separated ? "separated" : "intersecting"}};
}

}  // namespace

void cmd_forward(const CommonOptions& opt, const std::string& trace, double scale, std::ostream& out) {
  const auto g = parse_trace(trace);
  Loaded l = load(opt);
  const Discretization& disc = *l.scenario.disc;
  const Mesh& mesh = disc.mesh();
  const MaterialField field =
      MaterialField::with_anomaly(std::vector<double>(mesh.num_triangles(), l.scenario.background),
                                  classify_elements(mesh, l.scenario.anomaly), l.scenario.law);
  const BoundaryPotential f = sample_boundary(disc, [&](const Vec2& p) { return g(std::atan2(p.y(), p.x())); }, scale);
  SolverOptions so = l.config.solver;
  if (!opt.quiet) so.log = [](const std::string& m) { std::cerr << m << std::endl; };
  const Solution sol = solve_nonlinear_dirichlet(disc, field, f, so);
  const double energy = dirichlet_energy(disc, field, sol.u);
  auto csv = open_out(l.out / "field.csv");
  write_field_csv(csv, mesh, sol.u);
  out << std::setprecision(12) << "energy " << energy << '\n' << "iterations " << sol.report.iterations << '\n';
}

void cmd_precompute(const CommonOptions& opt, std::ostream& out) {
  Loaded l = load(opt);
  const auto t0 = std::chrono::steady_clock::now();
  const Precomputed pre = precompute(l.scenario, options_for(l, opt));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  auto header = geometry_header(l.config);
  header["physics"] = to_string(l.config.physics);
  header["directions"] = std::to_string(l.config.potentials.directions);
  header["potentials"] = std::to_string(pre.potentials.size());
  write_potential_set(l.out / "potentials", pre.potentials, pre.responses, header);

  // Per-T coverage: how many fictitious anomalies and potentials each cell got.
  std::vector<int> count(pre.grid.cells.size(), 0);
  for (const auto& p : pre.potentials) ++count[p.i];
  auto cov = open_out(l.out / "potentials" / "coverage.csv");
  cov << "i,fictitious,potentials\n";
  for (std::size_t i = 0; i < count.size(); ++i) cov << i << ',' << pre.fictitious[i].size() << ',' << count[i] << '\n';

  if (pre.potentials.empty()) std::cerr << "warning: no potentials synthesized; every test anomaly will be kept\n";
  out << "pairs " << pre.stats.pairs << '\n'
      << "empty_pairs " << pre.stats.empty_pairs << '\n'
      << "selection_failures " << pre.stats.selection_failures << '\n'
      << "response_failures " << pre.stats.response_failures << '\n'
      << "potentials " << pre.potentials.size() << '\n'
      << std::setprecision(3) << "seconds " << seconds << '\n';
}

void cmd_reconstruct(const CommonOptions& opt, const std::optional<fs::path>& potentials, std::ostream& out) {
  Loaded l = load(opt);
  const fs::path dir = potentials ? *potentials : l.out / "potentials";
  PotentialSet set = read_potential_set(dir);
  for (const auto& [key, value] : geometry_header(l.config)) {
    const auto it = set.header.find(key);
    if (it == set.header.end()) throw MissingArtifact("potential manifest lacks '" + key + "'");
    if (it->second != value) {
      throw ConfigError("config " + key + " '" + value + "' differs from the precompute's '" + it->second + "'");
    }
  }

  const PipelineOptions o = options_for(l, opt);
  Precomputed pre;
  pre.grid = build_test_grid(l.config.radius, l.config.grid);
  pre.potentials = std::move(set.potentials);
  pre.responses = std::move(set.responses);
  for (const auto& p : pre.potentials) {
    if (p.i < 0 || static_cast<std::size_t>(p.i) >= pre.grid.cells.size()) {
      throw std::runtime_error("potential refers to test anomaly " + std::to_string(p.i) + " outside the grid");
    }
  }
  const PipelineResult r = run_measurement(l.scenario, std::move(pre), l.config.noise, o);

  auto results = open_out(l.out / "results.txt");
  write_results_manifest(results, r.result, r.pre.grid);
  auto pgm = open_out(l.out / "union.pgm");
  write_pgm(pgm, r.pre.grid.n, r.result.kept_flags());
  auto outline = open_out(l.out / "outline.csv");
  write_outline_csv(outline, l.scenario.anomaly, l.config.radius);
  auto hist = open_out(l.out / "histogram.csv");
  write_energy_histogram(hist, r.clean, l.scenario.transducer_k);

  int kept = 0, skipped = 0;
  for (const auto& v : r.result.verdicts) {
    kept += v.kept ? 1 : 0;
    skipped += v.skipped;
  }
  if (skipped) std::cerr << "warning: " << skipped << " (i, j, k) entries skipped for missing data\n";
  out << "kept " << kept << " of " << r.result.verdicts.size() << '\n'
      << "potentials " << r.result.potential_count << '\n'
      << "seed " << r.result.seed << '\n';
  for (int row = 0; row < r.pre.grid.n; ++row) {
    for (int col = 0; col < r.pre.grid.n; ++col) out << (r.result.verdicts[row * r.pre.grid.n + col].kept ? '#' : '.');
    out << '\n';
  }
}

void cmd_bench(const CommonOptions& opt, int cell, int samples, int modes, std::ostream& out) {
  if (samples < 1 || modes < 1) throw ConfigError("bench: samples and modes must be positive");
  Loaded l = load(opt);
  const Discretization& disc = *l.scenario.disc;
  const Mesh& mesh = disc.mesh();
  const TestGrid grid = build_test_grid(l.config.radius, l.config.grid);
  if (cell < 0 || static_cast<std::size_t>(cell) >= grid.cells.size()) throw ConfigError("bench: cell out of range");

  const MaterialField bg = l.scenario.background_field();
  const MaterialField t_field = test_anomaly_field(mesh, grid.cells[cell], l.scenario.law, bg, l.scenario.regime);
  const MaterialField a_field =
      MaterialField::with_anomaly(std::vector<double>(mesh.num_triangles(), l.scenario.background),
                                  classify_elements(mesh, l.scenario.anomaly), l.scenario.law);
  const Eigen::MatrixXd mass = boundary_mass_matrix(mesh);
  std::mt19937_64 gen(l.config.noise.seed);
  std::normal_distribution<double> normal;

  const auto t0 = std::chrono::steady_clock::now();
  double best = std::numeric_limits<double>::infinity();
  int solves = 0, found_at = -1;
  for (int s = 0; s < samples; ++s) {
    std::vector<double> a(modes), b(modes);
    for (int n = 0; n < modes; ++n) {
      a[n] = normal(gen);
      b[n] = normal(gen);
    }
    BoundaryPotential f = sample_boundary(disc, [&](const Vec2& p) {
      const double t = std::atan2(p.y(), p.x());
      double v = 0.0;
      for (int n = 0; n < modes; ++n) v += a[n] * std::cos((n + 1) * t) + b[n] * std::sin((n + 1) * t);
      return v;
    });
    f.values /= std::sqrt(f.values.dot(mass * f.values));
    f.scale = l.config.potentials.lambda_init;
    try {
      const double d = avg_dtn_pairing(disc, a_field, f, l.config.solver) - avg_dtn_pairing(disc, t_field, f, l.config.solver);
      solves += 2;
      best = std::min(best, d);
      if (d < 0.0 && found_at < 0) found_at = s;
    } catch (const ConvergenceFailure&) {
      solves += 2;
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out << std::setprecision(6) << "cell " << cell << '\n'
      << "samples " << samples << '\n'
      << "forward_solves " << solves << '\n'
      << "min_difference " << best << '\n'
      << "first_negative_sample " << found_at << '\n'
      << "seconds " << seconds << '\n';
}

}  // namespace monotomo::cli
