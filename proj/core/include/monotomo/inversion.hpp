#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "monotomo/fem.hpp"
#include "monotomo/geometry.hpp"
#include "monotomo/materials.hpp"
#include "monotomo/potentials.hpp"

namespace monotomo {

/// Labels only; the mathematics is identical across physics.
enum class Physics { SteadyCurrents, Magnetostatic, Electrostatic };

std::string to_string(Physics p);
/// Accepts "steady-currents", "magnetostatic", "electrostatic".
Physics physics_from_string(const std::string& s);

struct Scenario {
  std::shared_ptr<const Discretization> disc;
  /// Optional finer mesh for the simulated measurements; traces are
  /// transferred by boundary angle. Null means `disc`.
  std::shared_ptr<const Discretization> measurement_disc;
  double background = 1.0;
  MaterialLaw law = MaterialLaw::linear(1.0);
  MaterialBounds bounds{1.0, 1.0};
  Region anomaly = Region::empty();
  Physics physics = Physics::SteadyCurrents;
  double transducer_k = 1.0;
  Regime regime = Regime::Separated;
  /// Operating cap below s0; used only in the intersecting regime.
  double s_m = 0.0;
  /// Upper end of the field range scanned by validate_scenario.
  double s_check = 1e3;

  MaterialField background_field() const;
  /// Coefficient put on T in the linear lower bound: c_nl^l or gamma_l.
  double lower_coefficient() const;
};

/// Checks the scenario's law against its bounds and regime; returns a list of
/// problems (empty when valid).
std::vector<std::string> validate_scenario(const Scenario& s, int grid_size = 100001);

struct GridSpec {
  int n = 8;
  /// Side of the ROI square relative to the inscribed square of the disk.
  double roi_fraction = 0.95;
};

/// Square test anomalies covering the ROI. Cell i = row * n + col, row 0 at
/// the top (largest y).
struct TestGrid {
  int n = 0;
  double half_side = 0.0;
  std::vector<Region> cells;

  Vec2 cell_center(int i) const;
  double cell_side() const { return 2.0 * half_side / n; }
};

TestGrid build_test_grid(double radius, const GridSpec& spec);

struct PotentialKey {
  int i = 0;
  int j = 0;
  int k = 0;
  auto operator<=>(const PotentialKey&) const = default;
};

inline PotentialKey key_of(const TestPotential& p) { return {p.i, p.j, p.k}; }

using ResponseTable = std::map<PotentialKey, double>;

struct NoiseRange {
  double range;  // L, volts
  double eta1;
  double eta2;
};

struct NoiseModel {
  std::vector<NoiseRange> ranges;  // ascending by range
  std::uint64_t seed = 0;

  /// 200 mV, 2 V and 20 V ranges of an 8.5-digit bench multimeter.
  static NoiseModel keithley_2002(std::uint64_t seed = 0);
  /// Zero noise, unlimited range.
  static NoiseModel noiseless();
  /// Smallest range covering |m|; throws RangeOverflow.
  const NoiseRange& select(double m) const;
  double max_range() const;
};

struct Measurement {
  double clean = 0.0;  // k <avg Lambda_A(f), f>
  double value = 0.0;  // noisy reading
  NoiseRange range{0.0, 0.0, 0.0};
};

using MeasurementTable = std::map<PotentialKey, Measurement>;

/// Noise-free reading k <avg Lambda_A(lambda f), lambda f> on the true anomaly.
double simulate_reading(const Scenario& scenario, const TestPotential& potential, const SolverOptions& options = {});

/// Adds bounded instrument noise. Draws are keyed by (seed, i, j, k).
Measurement apply_noise(double clean, const NoiseModel& noise, const PotentialKey& key);

Measurement measure(const Scenario& scenario, const TestPotential& potential, const NoiseModel& noise,
                    const SolverOptions& options = {});

/// Stored test-anomaly responses <avg Lambda_Ti(lambda f), lambda f>. Values
/// found during scaling are reused unless `recompute` is set. Failed solves
/// leave the entry out.
ResponseTable precompute_responses(const Scenario& scenario, const std::vector<Region>& tests,
                                   const std::vector<TestPotential>& potentials, int jobs = 1, bool recompute = false,
                                   const SolverOptions& options = {});

struct Verdict {
  bool kept = true;
  double worst_margin = 0.0;
  PotentialKey worst{};
  int evaluated = 0;
  int skipped = 0;
};

struct ReconstructionResult {
  std::vector<Verdict> verdicts;  // per test anomaly
  ElementMask union_mask;         // empty unless element masks were given
  std::size_t potential_count = 0;
  std::uint64_t seed = 0;

  std::vector<std::uint8_t> kept_flags() const;
};

/// margin(i,j,k) = (M~ + eta2 L) / (1 - eta1) - k <avg Lambda_Ti(f), f>;
/// T_i is kept iff every available margin is >= 0. Entries present in only
/// one of the tables are skipped.
ReconstructionResult reconstruct(const ResponseTable& responses, const MeasurementTable& measurements,
                                 double transducer_k, int num_tests, const std::vector<ElementMask>& test_masks = {},
                                 std::uint64_t seed = 0);

struct PipelineOptions {
  GridSpec grid;
  PotentialSpec potentials;
  /// Cap on lambda keeping every reading below this value; <= 0 disables.
  double max_reading = 0.0;
  int jobs = 1;
  SolverOptions solver;
  std::function<void(const std::string&)> progress;
};

struct PrecomputeStats {
  int pairs = 0;
  int empty_pairs = 0;
  int selection_failures = 0;
  int response_failures = 0;
};

struct Precomputed {
  TestGrid grid;
  std::vector<std::vector<Region>> fictitious;  // per test anomaly
  std::vector<TestPotential> potentials;        // ordered by (i, j, k)
  ResponseTable responses;
  PrecomputeStats stats;
};

/// Test grid, fictitious anomalies, potential synthesis and responses.
Precomputed precompute(const Scenario& scenario, const PipelineOptions& options);

/// Noise-free readings for every potential; failed solves are left out.
std::map<PotentialKey, double> simulate_readings(const Scenario& scenario,
                                                 const std::vector<TestPotential>& potentials, int jobs = 1,
                                                 const SolverOptions& options = {});

MeasurementTable apply_noise_all(const std::map<PotentialKey, double>& clean, const NoiseModel& noise);

struct PipelineResult {
  Precomputed pre;
  std::map<PotentialKey, double> clean;
  MeasurementTable measurements;
  ReconstructionResult result;
};

PipelineResult run_pipeline(const Scenario& scenario, const PipelineOptions& options, const NoiseModel& noise);

/// Measure and reconstruct against an existing precompute. The precompute
/// does not depend on the true anomaly, so one can serve many fixtures.
PipelineResult run_measurement(const Scenario& scenario, Precomputed pre, const NoiseModel& noise,
                               const PipelineOptions& options);

/// Piecewise-linear transfer of a boundary trace between two disk meshes by
/// polar angle.
Eigen::VectorXd transfer_trace(const Mesh& from, const Mesh& to, const Eigen::VectorXd& values);

/// Runs fn(0..n-1) on up to `jobs` threads. The first exception (by index) is
/// rethrown after all workers finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace monotomo
