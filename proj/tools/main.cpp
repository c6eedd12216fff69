#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "monotomo/errors.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kMissing = 3, kSolver = 4 };

}  // namespace

int main(int argc, char** argv) {
  using namespace monotomo;
  CLI::App app{"Monotonicity-based imaging of nonlinear anomalies"};
  app.require_subcommand(1);

  cli::CommonOptions opt;
  opt.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string out_dir;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Run configuration (INI)")->required();
    sub->add_option("--out", out_dir, "Output directory; overrides [output] dir");
    sub->add_option("--seed", seed, "Noise seed; overrides [noise] seed");
    sub->add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", opt.quiet, "Suppress progress on stderr");
  };

  std::string trace = "cos:1";
  double scale = 1.0;
  auto* forward = app.add_subcommand("forward", "Solve the forward problem on the configured anomaly");
  add_common(forward);
  forward->add_option("--trace", trace, "Boundary trace: cos:n, sin:n or zero");
  forward->add_option("--scale", scale, "Amplitude multiplier");

  auto* pre = app.add_subcommand("precompute", "Synthesize test potentials and responses");
  add_common(pre);

  std::string potentials;
  auto* rec = app.add_subcommand("reconstruct", "Measure and reconstruct from precomputed potentials");
  add_common(rec);
  rec->add_option("--potentials", potentials, "Potential directory (default <out>/potentials)");

  int cell = 0, samples = 20, modes = 8;
  auto* bench = app.add_subcommand("bench", "Random-search baseline on one test cell");
  add_common(bench);
  bench->add_option("--cell", cell, "Test cell index");
  bench->add_option("--samples", samples, "Random traces to try");
  bench->add_option("--modes", modes, "Fourier modes per trace");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (!out_dir.empty()) opt.out = out_dir;
  for (auto* sub : {forward, pre, rec, bench}) {
    if (sub->parsed() && sub->count("--seed")) opt.seed = seed;
  }

  try {
    if (forward->parsed()) cli::cmd_forward(opt, trace, scale, std::cout);
    if (pre->parsed()) cli::cmd_precompute(opt, std::cout);
    if (rec->parsed()) {
      cli::cmd_reconstruct(opt, potentials.empty() ? std::nullopt : std::optional<std::filesystem::path>(potentials),
                           std::cout);
    }
    if (bench->parsed()) cli::cmd_bench(opt, cell, samples, modes, std::cout);
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const MissingArtifact& e) {
    std::cerr << "missing artifact: " << e.what() << '\n';
    return kMissing;
  } catch (const ConvergenceFailure& e) {
    std::cerr << "solver failure: " << e.what() << " (residual " << e.last_residual() << ")\n";
    return kSolver;
  } catch (const NumericalFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const SelectionFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const RangeOverflow& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
