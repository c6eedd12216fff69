#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "monotomo/inversion.hpp"

using namespace monotomo;
namespace mt = monotomo::testing;

namespace {

constexpr double kR = 0.03;

Scenario small_steady(int rings = 12) {
  Scenario s;
  s.disc = std::make_shared<Discretization>(build_disk_mesh(kR, rings));
  s.background = 1e7;
  s.law = laws::superconducting_mixture();
  s.bounds = {2.7861e7, 1.3875e10};
  s.transducer_k = 1e-2;
  return s;
}

PipelineOptions small_options() {
  PipelineOptions o;
  o.grid.n = 4;
  o.potentials.directions = 4;
  o.max_reading = 20.0;
  return o;
}

Measurement reading(double value, double range, double eta1, double eta2) {
  return {value, value, {range, eta1, eta2}};
}

// One shared precompute for the tests that need real potentials.
class SmallPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    scenario_ = new Scenario(small_steady());
    pre_ = new Precomputed(precompute(*scenario_, small_options()));
  }
  static void TearDownTestSuite() {
    delete pre_;
    delete scenario_;
  }
  static Scenario* scenario_;
  static Precomputed* pre_;
};

Scenario* SmallPipeline::scenario_ = nullptr;
Precomputed* SmallPipeline::pre_ = nullptr;

}  // namespace

TEST(Physics, Names) {
  for (Physics p : {Physics::SteadyCurrents, Physics::Magnetostatic, Physics::Electrostatic}) {
    EXPECT_EQ(physics_from_string(to_string(p)), p);
  }
  EXPECT_THROW(physics_from_string("acoustic"), std::invalid_argument);
}

TEST(Scenario, ShippedConfigsValidate) {
  for (const char* name : {"steady_currents", "magnetostatic", "linear_disk"}) {
    const auto cfg = mt::shipped_config(name);
    EXPECT_TRUE(validate_scenario(cfg.build_scenario()).empty()) << name;
  }
}

TEST(Scenario, ProblemsReported) {
  Scenario s = small_steady(4);
  s.bounds = {5e6, 1.3875e10};
  EXPECT_FALSE(validate_scenario(s, 1001).empty());
  s = small_steady(4);
  s.bounds = {2.7861e7, 1e9};
  EXPECT_FALSE(validate_scenario(s, 1001).empty());
  s = small_steady(4);
  s.transducer_k = 0.0;
  EXPECT_FALSE(validate_scenario(s, 1001).empty());
  Scenario m;
  m.disc = std::make_shared<Discretization>(build_disk_mesh(0.3, 4));
  m.background = kMu0;
  m.law = laws::steel_surrogate();
  m.bounds = {kMu0, 8000 * kMu0};
  m.regime = Regime::Intersecting;
  m.s_m = 0.0;
  EXPECT_FALSE(validate_scenario(m, 1001).empty());
  m.s_m = 100.0;
  EXPECT_TRUE(validate_scenario(m, 1001).empty());
  EXPECT_GT(m.lower_coefficient(), kMu0);
  // With a 2 mu0 background the decaying law crosses it at a finite field.
  m.background = 2 * kMu0;
  m.s_check = 1e6;
  const auto s0 = intersection_s0(m.law, m.background, m.s_check);
  ASSERT_TRUE(s0.has_value());
  m.s_m = 2 * *s0;
  EXPECT_FALSE(validate_scenario(m, 10001).empty());
}

TEST(TestGridTest, Layout) {
  const TestGrid g = build_test_grid(1.0, {8, 0.95});
  ASSERT_EQ(g.cells.size(), 64u);
  EXPECT_NEAR(g.half_side, 0.95 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(g.cell_side(), 2 * g.half_side / 8, 1e-15);
  // Row 0 at the top, columns left to right.
  EXPECT_GT(g.cell_center(0).y(), g.cell_center(8).y());
  EXPECT_LT(g.cell_center(0).x(), g.cell_center(1).x());
  for (int i = 0; i < 64; ++i) EXPECT_TRUE(g.cells[i].contains(g.cell_center(i)));
  // The ROI square corners lie inside the disk.
  EXPECT_LT(std::hypot(g.half_side, g.half_side), 1.0);
  EXPECT_THROW(build_test_grid(1.0, {0, 0.95}), std::invalid_argument);
  EXPECT_THROW(build_test_grid(1.0, {8, 1.0}), std::invalid_argument);
}

TEST(Noise, TableValues) {
  const NoiseModel k = NoiseModel::keithley_2002(9);
  ASSERT_EQ(k.ranges.size(), 3u);
  EXPECT_EQ(k.seed, 9u);
  const NoiseRange& r = k.select(0.15);
  EXPECT_EQ(r.range, 0.2);
  EXPECT_EQ(r.eta1, 3.5e-6);
  EXPECT_EQ(r.eta2, 3.0e-6);
  EXPECT_EQ(k.select(0.2).range, 0.2);
  EXPECT_EQ(k.select(1.5).range, 2.0);
  EXPECT_EQ(k.select(-19.0).range, 20.0);
  EXPECT_EQ(k.max_range(), 20.0);
  EXPECT_THROW(k.select(20.5), RangeOverflow);
  for (std::size_t i = 0; i < k.ranges.size(); ++i) {
    EXPECT_GE(k.ranges[i].eta1, 0.0);
    EXPECT_LT(k.ranges[i].eta1, 1.0);
    EXPECT_GE(k.ranges[i].eta2, 0.0);
    if (i) EXPECT_LT(k.ranges[i - 1].range, k.ranges[i].range);
  }
}

TEST(Noise, NoiselessIsExact) {
  const Measurement m = apply_noise(0.123456789, NoiseModel::noiseless(), {1, 2, 3});
  EXPECT_EQ(m.value, 0.123456789);
  EXPECT_EQ(apply_noise(1e9, NoiseModel::noiseless(), {0, 0, 0}).value, 1e9);
}

TEST(Noise, BoundHoldsOverDraws) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> level(-1.0, 19.9);
  int distinct = 0;
  double last = 0.0;
  for (int n = 0; n < 10000; ++n) {
    const NoiseModel noise = NoiseModel::keithley_2002(static_cast<std::uint64_t>(n) * 7919u);
    const double clean = level(gen);
    const Measurement m = apply_noise(clean, noise, {n % 64, n % 7, n % 3});
    EXPECT_LE(std::abs(m.value - clean), m.range.eta1 * std::abs(clean) + m.range.eta2 * m.range.range);
    distinct += (m.value - clean) != last ? 1 : 0;
    last = m.value - clean;
  }
  EXPECT_GT(distinct, 9900);
}

TEST(Noise, KeyedDeterminism) {
  const NoiseModel a = NoiseModel::keithley_2002(42);
  EXPECT_EQ(apply_noise(0.01, a, {3, 1, 2}).value, apply_noise(0.01, a, {3, 1, 2}).value);
  EXPECT_NE(apply_noise(0.01, a, {3, 1, 2}).value, apply_noise(0.01, a, {3, 1, 1}).value);
  EXPECT_NE(apply_noise(0.01, a, {3, 1, 2}).value,
            apply_noise(0.01, NoiseModel::keithley_2002(43), {3, 1, 2}).value);
}

TEST(Reconstruct, RuleAsWritten) {
  const double k = 2.0;
  ResponseTable resp;
  MeasurementTable meas;
  // Test 0: every margin nonnegative, one exactly zero.
  resp[{0, 0, 0}] = 1.0;
  meas[{0, 0, 0}] = reading(3.0, 0.2, 0.0, 0.0);
  resp[{0, 1, 0}] = 0.5;
  meas[{0, 1, 0}] = reading(0.5, 0.2, 0.5, 0.0);  // (0.5 + 0) / 0.5 - 1 = 0
  // Test 1: response strictly above the inflated bound.
  resp[{1, 0, 0}] = 1.0;
  meas[{1, 0, 0}] = reading(1.9, 0.2, 1e-6, 1e-6);
  // Test 2: only missing data, kept.
  resp[{2, 0, 0}] = 100.0;
  meas[{2, 1, 0}] = reading(0.0, 0.2, 0.0, 0.0);
  const ReconstructionResult r = reconstruct(resp, meas, k, 4);
  ASSERT_EQ(r.verdicts.size(), 4u);
  EXPECT_TRUE(r.verdicts[0].kept);
  EXPECT_EQ(r.verdicts[0].worst_margin, 0.0);
  EXPECT_EQ(r.verdicts[0].worst, (PotentialKey{0, 1, 0}));
  EXPECT_FALSE(r.verdicts[1].kept);
  const double bound = (1.9 + 1e-6 * 0.2) / (1 - 1e-6);
  EXPECT_DOUBLE_EQ(r.verdicts[1].worst_margin, bound - 2.0);
  EXPECT_TRUE(r.verdicts[2].kept);
  EXPECT_EQ(r.verdicts[2].evaluated, 0);
  EXPECT_EQ(r.verdicts[2].skipped, 2);
  EXPECT_TRUE(r.verdicts[3].kept);
  EXPECT_EQ(r.potential_count, 3u);
  EXPECT_EQ(r.kept_flags(), (std::vector<std::uint8_t>{1, 0, 1, 1}));
}

TEST(Reconstruct, NoiselessUnboundedRange) {
  ResponseTable resp{{{0, 0, 0}, 1.0}};
  MeasurementTable meas{{{0, 0, 0}, apply_noise(1.0, NoiseModel::noiseless(), {0, 0, 0})}};
  const ReconstructionResult r = reconstruct(resp, meas, 1.0, 1);
  EXPECT_TRUE(r.verdicts[0].kept);
  EXPECT_EQ(r.verdicts[0].worst_margin, 0.0);
}

TEST(Reconstruct, UnionMaskAndErrors) {
  ResponseTable resp{{{0, 0, 0}, 1.0}, {{1, 0, 0}, 5.0}};
  MeasurementTable meas{{{0, 0, 0}, reading(2.0, 20, 0, 0)}, {{1, 0, 0}, reading(2.0, 20, 0, 0)}};
  const std::vector<ElementMask> masks = {{1, 0, 0}, {0, 1, 0}};
  const ReconstructionResult r = reconstruct(resp, meas, 1.0, 2, masks, 77);
  EXPECT_EQ(r.union_mask, (ElementMask{1, 0, 0}));
  EXPECT_EQ(r.seed, 77u);
  EXPECT_THROW(reconstruct(resp, meas, 1.0, 2, {{1, 0, 0}}), std::invalid_argument);
  EXPECT_THROW(reconstruct(resp, meas, 1.0, 1), std::out_of_range);
  EXPECT_THROW(reconstruct(resp, meas, 1.0, -1), std::invalid_argument);
}

TEST(Reconstruct, EnumerationOrderIrrelevant) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int nt = 12;
  ResponseTable resp;
  MeasurementTable meas;
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < 3; ++j) {
      resp[{i, j, 0}] = u(gen);
      meas[{i, j, 0}] = reading(u(gen) + 0.3, 2.0, 1.2e-6, 0.3e-6);
    }
  }
  std::vector<int> perm(nt);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), gen);
  ResponseTable resp2;
  MeasurementTable meas2;
  for (const auto& [key, v] : resp) resp2[{perm[key.i], key.j, key.k}] = v;
  for (const auto& [key, v] : meas) meas2[{perm[key.i], key.j, key.k}] = v;
  const ReconstructionResult a = reconstruct(resp, meas, 1.0, nt);
  const ReconstructionResult b = reconstruct(resp2, meas2, 1.0, nt);
  for (int i = 0; i < nt; ++i) {
    EXPECT_EQ(a.verdicts[i].kept, b.verdicts[perm[i]].kept);
    EXPECT_EQ(a.verdicts[i].worst_margin, b.verdicts[perm[i]].worst_margin);
  }
}

TEST(ParallelFor, CoversEveryIndexAndRethrowsFirst) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 3, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  try {
    parallel_for(50, 4, [](std::size_t i) {
      if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
    });
    FAIL() << "expected a rethrow";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
}

TEST(TransferTrace, SameMeshIdentityAndRefinement) {
  const Mesh coarse = build_disk_mesh(1.0, 6);
  const Mesh fine = build_disk_mesh(1.0, 12);
  const Discretization dc(coarse), df(fine);
  const Eigen::VectorXd f = mt::fourier_trace(dc, 1).values;
  EXPECT_LE((transfer_trace(coarse, coarse, f) - f).cwiseAbs().maxCoeff(), 1e-14);
  const Eigen::VectorXd g = transfer_trace(coarse, fine, f);
  const Eigen::VectorXd exact = mt::fourier_trace(df, 1).values;
  EXPECT_LE((g - exact).cwiseAbs().maxCoeff(), 0.02);
  EXPECT_THROW(transfer_trace(coarse, fine, Eigen::VectorXd::Ones(3)), std::invalid_argument);
}

TEST_F(SmallPipeline, PotentialsAndResponses) {
  ASSERT_FALSE(pre_->potentials.empty());
  EXPECT_EQ(pre_->grid.cells.size(), 16u);
  for (const auto& p : pre_->potentials) {
    EXPECT_LT(p.delta, 0.0);
    EXPECT_GT(p.lambda, 0.0);
    ASSERT_TRUE(pre_->responses.count(key_of(p)));
    EXPECT_GE(pre_->responses.at(key_of(p)), 0.0);
  }
  // Stored values equal a fresh recomputation.
  std::vector<TestPotential> some(pre_->potentials.begin(), pre_->potentials.begin() + 5);
  const ResponseTable again = precompute_responses(*scenario_, pre_->grid.cells, some, 2, true);
  for (const auto& p : some) EXPECT_NEAR(again.at(key_of(p)), pre_->responses.at(key_of(p)), 1e-12 * again.at(key_of(p)));
}

TEST_F(SmallPipeline, ZeroPotentialStoresZero) {
  TestPotential zero = pre_->potentials.front();
  zero.trace.setZero();
  zero.response = std::nan("");
  const ResponseTable t = precompute_responses(*scenario_, pre_->grid.cells, {zero});
  EXPECT_EQ(t.at(key_of(zero)), 0.0);
}

TEST_F(SmallPipeline, LinearLawReproducesQuadraticForm) {
  Scenario lin = *scenario_;
  lin.law = MaterialLaw::linear(3e7);
  const TestPotential p = pre_->potentials.front();
  TestPotential fresh = p;
  fresh.response = std::nan("");
  const double v = precompute_responses(lin, pre_->grid.cells, {fresh}).at(key_of(p));
  std::vector<double> c(lin.disc->mesh().num_triangles(), 1e7);
  const ElementMask in_t = classify_elements(lin.disc->mesh(), pre_->grid.cells[p.i]);
  for (std::size_t e = 0; e < c.size(); ++e) {
    if (in_t[e]) c[e] = 3e7;
  }
  const DtNMatrix K = schur_dtn_matrix(*lin.disc, MaterialField(c));
  const double expected = 0.5 * p.lambda * p.lambda * p.trace.dot(K.k * p.trace);
  EXPECT_NEAR(v, expected, 1e-9 * expected);
}

TEST_F(SmallPipeline, EmptyAnomalyDiscardsEverything) {
  Scenario s = *scenario_;
  s.anomaly = Region::empty();
  const PipelineResult r = run_measurement(s, *pre_, NoiseModel::noiseless(), small_options());
  for (const auto& v : r.result.verdicts) EXPECT_FALSE(v.kept);
}

TEST_F(SmallPipeline, UnionOfCellsKeepsCells) {
  Scenario s = *scenario_;
  s.anomaly = Region::union_of({pre_->grid.cells[5], pre_->grid.cells[6]});
  const PipelineResult r = run_measurement(s, *pre_, NoiseModel::noiseless(), small_options());
  EXPECT_TRUE(r.result.verdicts[5].kept);
  EXPECT_TRUE(r.result.verdicts[6].kept);
  // A subset of the reconstruction.
  const ElementMask a = classify_elements(s.disc->mesh(), s.anomaly);
  for (std::size_t e = 0; e < a.size(); ++e) {
    if (a[e]) EXPECT_EQ(r.result.union_mask[e], 1);
  }
}

TEST_F(SmallPipeline, MarginsGrowWithAnomaly) {
  Scenario small = *scenario_;
  small.anomaly = Region::circle({0.1 * kR, 0.0}, 0.2 * kR);
  Scenario big = *scenario_;
  big.anomaly = Region::union_of({small.anomaly, Region::circle({-0.2 * kR, 0.2 * kR}, 0.25 * kR)});
  const auto a = simulate_readings(small, pre_->potentials, 2);
  const auto b = simulate_readings(big, pre_->potentials, 2);
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [key, v] : a) EXPECT_GE(b.at(key), v * (1 - 1e-12)) << key.i << ' ' << key.j << ' ' << key.k;
}

TEST_F(SmallPipeline, DeterministicAcrossThreadCounts) {
  Scenario s = *scenario_;
  s.anomaly = Region::circle({0.2 * kR, 0.1 * kR}, 0.3 * kR);
  PipelineOptions one = small_options();
  PipelineOptions two = small_options();
  two.jobs = 2;
  const NoiseModel noise = NoiseModel::keithley_2002(5);
  const PipelineResult a = run_measurement(s, *pre_, noise, one);
  const PipelineResult b = run_measurement(s, *pre_, noise, two);
  ASSERT_EQ(a.measurements.size(), b.measurements.size());
  for (const auto& [key, m] : a.measurements) EXPECT_EQ(m.value, b.measurements.at(key).value);
  for (std::size_t i = 0; i < a.result.verdicts.size(); ++i) {
    EXPECT_EQ(a.result.verdicts[i].kept, b.result.verdicts[i].kept);
    EXPECT_EQ(a.result.verdicts[i].worst_margin, b.result.verdicts[i].worst_margin);
  }
}

TEST_F(SmallPipeline, MeasureMatchesSimulatedReading) {
  Scenario s = *scenario_;
  s.anomaly = Region::circle({0.0, 0.0}, 0.3 * kR);
  const TestPotential& p = pre_->potentials.back();
  const double clean = simulate_reading(s, p);
  const Measurement m = measure(s, p, NoiseModel::keithley_2002(3));
  EXPECT_EQ(m.clean, clean);
  EXPECT_LE(std::abs(m.value - clean), m.range.eta1 * clean + m.range.eta2 * m.range.range);
  // A separate measurement mesh identical to the precompute mesh changes nothing.
  s.measurement_disc = std::make_shared<Discretization>(build_disk_mesh(kR, 12));
  EXPECT_NEAR(simulate_reading(s, p), clean, 1e-12 * clean);
  s.measurement_disc = std::make_shared<Discretization>(build_disk_mesh(kR, 24));
  EXPECT_GT(simulate_reading(s, p), 0.0);
}

TEST(Pipeline, RangeGuardCapsReadings) {
  Scenario s = small_steady(8);
  s.anomaly = Region::circle({0.0, 0.0}, 0.4 * kR);
  PipelineOptions o = small_options();
  o.grid.n = 2;
  o.max_reading = 1e-3;
  const PipelineResult r = run_pipeline(s, o, NoiseModel::noiseless());
  ASSERT_FALSE(r.clean.empty());
  for (const auto& [key, v] : r.clean) EXPECT_LE(v, 1e-3);
}
