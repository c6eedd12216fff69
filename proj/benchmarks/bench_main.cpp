#include <cmath>

#include <benchmark/benchmark.h>

#include "monotomo/inversion.hpp"

using namespace monotomo;

namespace {

constexpr double kR = 0.03;

BoundaryPotential mode_two(const Discretization& disc, double scale) {
  return sample_boundary(disc, [](const Vec2& p) { return std::cos(2 * std::atan2(p.y(), p.x())); }, scale);
}

MaterialField mixture_field(const Discretization& disc) {
  const auto n = disc.mesh().num_triangles();
  return MaterialField::with_anomaly(std::vector<double>(n, 1e7),
                                     classify_elements(disc.mesh(), Region::circle({0.2 * kR, 0.1 * kR}, 0.3 * kR)),
                                     laws::superconducting_mixture());
}

void BM_LinearSolve(benchmark::State& state) {
  const Discretization disc(build_disk_mesh(kR, static_cast<int>(state.range(0))));
  const MaterialField field = MaterialField::uniform(disc.mesh().num_triangles(), 1e7);
  const BoundaryPotential f = mode_two(disc, 1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(solve_linear_dirichlet(disc, field, f));
  state.counters["nodes"] = static_cast<double>(disc.mesh().num_nodes());
}
BENCHMARK(BM_LinearSolve)->Arg(12)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);

void BM_NonlinearSolve(benchmark::State& state) {
  const Discretization disc(build_disk_mesh(kR, static_cast<int>(state.range(0))));
  const MaterialField field = mixture_field(disc);
  const BoundaryPotential f = mode_two(disc, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_nonlinear_dirichlet(disc, field, f));
}
BENCHMARK(BM_NonlinearSolve)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_SchurDtN(benchmark::State& state) {
  const Discretization disc(build_disk_mesh(kR, static_cast<int>(state.range(0))));
  const MaterialField field = MaterialField::uniform(disc.mesh().num_triangles(), 1e7);
  for (auto _ : state) benchmark::DoNotOptimize(schur_dtn_matrix(disc, field));
  state.counters["boundary"] = static_cast<double>(disc.num_boundary());
}
BENCHMARK(BM_SchurDtN)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_NegativeEigenspace(benchmark::State& state) {
  const Discretization disc(build_disk_mesh(kR, static_cast<int>(state.range(0))));
  const MaterialField bg = MaterialField::uniform(disc.mesh().num_triangles(), 1e7);
  const Region T = Region::rectangle({-0.1 * kR, -0.1 * kR}, {0.1 * kR, 0.1 * kR});
  const Region F = Region::half_plane({0.3 * kR, 0.0}, {1.0, 0.0});
  const BoundingLaws b = build_bounding_laws(disc.mesh(), T, F, {2.7861e7, 1.3875e10}, bg, Regime::Separated);
  const DtNMatrix k_fu = schur_dtn_matrix(disc, b.gamma_F_u);
  const DtNMatrix k_tl = schur_dtn_matrix(disc, b.gamma_T_l);
  for (auto _ : state) benchmark::DoNotOptimize(negative_eigenspace(k_fu, k_tl, 3));
}
BENCHMARK(BM_NegativeEigenspace)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_EnergyDensity(benchmark::State& state) {
  const MaterialLaw law = laws::superconducting_mixture();
  double s = 1e-6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(law.energy_density(s));
    s = s < 1e3 ? s * 1.01 : 1e-6;
  }
}
BENCHMARK(BM_EnergyDensity);

void BM_Reconstruct(benchmark::State& state) {
  const int tests = 64, per_test = 35;
  ResponseTable responses;
  MeasurementTable measurements;
  for (int i = 0; i < tests; ++i) {
    for (int j = 0; j < per_test; ++j) {
      responses[{i, j, 0}] = 0.01 * (j + 1);
      measurements[{i, j, 0}] = {0.5, 0.5, {2.0, 1.2e-6, 0.3e-6}};
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(responses, measurements, 1e-2, tests));
}
BENCHMARK(BM_Reconstruct);

}  // namespace
BENCHMARK_MAIN();
