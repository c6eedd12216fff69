// Randomized checks of the structural properties each module promises.
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "monotomo/inversion.hpp"

using namespace monotomo;
namespace mt = monotomo::testing;

namespace {

constexpr double kR = 0.03;
constexpr double kBg = 1e7;
const MaterialBounds kBounds{2.7861e7, 1.3875e10};

double log_uniform(std::mt19937_64& gen, double lo, double hi) {
  return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(gen));
}

Region random_circle(std::mt19937_64& gen, double radius) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  return Region::circle({u(gen) * radius, u(gen) * radius}, (0.1 + 0.3 * (u(gen) + 0.5)) * radius);
}

}  // namespace

TEST(GeometryProperties, ClassificationIsMonotone) {
  std::mt19937_64 gen(21);
  const Mesh mesh = build_disk_mesh(1.0, 10);
  for (int trial = 0; trial < 40; ++trial) {
    const Region a = random_circle(gen, 1.0);
    const Region b = Region::union_of({a, random_circle(gen, 1.0)});
    const ElementMask ma = classify_elements(mesh, a);
    const ElementMask mb = classify_elements(mesh, b);
    for (std::size_t e = 0; e < ma.size(); ++e) {
      if (ma[e]) ASSERT_TRUE(mb[e]);
    }
  }
}

TEST(GeometryProperties, MembershipIsRepeatable) {
  std::mt19937_64 gen(22);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Region r = Region::union_of({shapes::kite({0.1, 0.0}, 0.6), Region::complement(Region::circle({0, 0}, 0.2))});
  for (int n = 0; n < 2000; ++n) {
    const Vec2 p(u(gen), u(gen));
    const bool first = r.contains(p);
    for (int k = 0; k < 3; ++k) ASSERT_EQ(r.contains(p), first);
  }
}

TEST(MaterialProperties, ShippedLawsStrictlyMonotoneFlux) {
  for (const auto& law : {laws::superconducting_mixture(), laws::steel_surrogate(), MaterialLaw::power_law_ej(1e-4, 8e9, 27)}) {
    EXPECT_TRUE(verify_assumptions(law, 1e3, 100000).h2_ok) << law.describe();
  }
}

TEST(MaterialProperties, EnergyIsConvex) {
  for (const auto& law : {laws::superconducting_mixture(), laws::steel_surrogate(), MaterialLaw::linear(3.0)}) {
    for (int n = 0; n <= 400; ++n) {
      const double s = std::pow(10.0, -6.0 + 9.0 * n / 400.0);
      const double h = 1e-3 * s;
      const double second = (law.energy_density(s + h) - 2 * law.energy_density(s) + law.energy_density(s - h)) / (h * h);
      // Quadrature roundoff in Q is relative to Q itself.
      const double noise = 1e-12 * law.energy_density(s + h) / (h * h);
      ASSERT_GE(second, -1e-8 - noise) << law.describe() << " s=" << s;
    }
  }
}

TEST(MaterialProperties, BruggemanBetweenPhases) {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int n = 0; n < 2000; ++n) {
    const double s1 = log_uniform(gen, 1e-3, 1e12);
    const double s2 = log_uniform(gen, 1e-3, 1e12);
    const double se = bruggeman_effective(s1, s2, frac(gen));
    ASSERT_GE(se, std::min(s1, s2) * (1 - 1e-12));
    ASSERT_LE(se, std::max(s1, s2) * (1 + 1e-12));
  }
}

TEST(MaterialProperties, LinearEnergyClosedForm) {
  std::mt19937_64 gen(24);
  for (int n = 0; n < 500; ++n) {
    const double c = log_uniform(gen, 1e-6, 1e10);
    const double s = log_uniform(gen, 1e-8, 1e8);
    ASSERT_NEAR(MaterialLaw::linear(c).energy_density(s), c * s * s / 2, 4e-16 * c * s * s);
  }
}

TEST(FemProperties, MonotoneInTheMaterial) {
  std::mt19937_64 gen(25);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Discretization disc(build_disk_mesh(kR, 8));
  const auto n = disc.mesh().num_triangles();
  int violations = 0;
  for (int pair = 0; pair < 5; ++pair) {
    std::vector<double> bg1(n), bg2(n);
    for (std::size_t e = 0; e < n; ++e) {
      bg1[e] = log_uniform(gen, 1e6, 5e6);
      bg2[e] = bg1[e] * (1.0 + u(gen));
    }
    const Region a1 = random_circle(gen, kR);
    const Region a2 = Region::union_of({a1, random_circle(gen, kR)});
    const MaterialField f1 =
        MaterialField::with_anomaly(bg1, classify_elements(disc.mesh(), a1), laws::superconducting_mixture());
    const MaterialField f2 =
        MaterialField::with_anomaly(bg2, classify_elements(disc.mesh(), a2), laws::superconducting_mixture());
    for (int t = 0; t < 10; ++t) {
      const BoundaryPotential f{mt::random_trace(disc, gen), log_uniform(gen, 1e-6, 1e-2)};
      const double e1 = avg_dtn_pairing(disc, f1, f);
      const double e2 = avg_dtn_pairing(disc, f2, f);
      if (e1 > e2 + 1e-9 * e2) ++violations;
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST(FemProperties, SolutionMinimizesEnergy) {
  std::mt19937_64 gen(26);
  std::normal_distribution<double> noise;
  const Discretization disc(build_disk_mesh(kR, 10));
  const auto n = disc.mesh().num_triangles();
  const MaterialField field = MaterialField::with_anomaly(
      std::vector<double>(n, kBg), classify_elements(disc.mesh(), Region::circle({0.2 * kR, 0}, 0.4 * kR)),
      laws::superconducting_mixture());
  for (double amp : {1e-5, 1e-3}) {
    const Solution s = solve_nonlinear_dirichlet(disc, field, mt::fourier_trace(disc, 2, amp));
    const double e0 = dirichlet_energy(disc, field, s.u);
    const double scale = s.u.cwiseAbs().maxCoeff();
    for (int trial = 0; trial < 20; ++trial) {
      Field v = s.u;
      for (int node : disc.interior_nodes()) v[node] += 1e-3 * scale * noise(gen);
      ASSERT_GE(dirichlet_energy(disc, field, v), e0 * (1 - 1e-14));
    }
  }
}

TEST(FemProperties, LinearEnergyScaleInvariant) {
  std::mt19937_64 gen(27);
  const Discretization unit(build_disk_mesh(1.0, 10));
  const Discretization big(build_disk_mesh(3.7, 10));
  std::vector<double> c(unit.mesh().num_triangles());
  for (auto& v : c) v = log_uniform(gen, 0.1, 10.0);
  const MaterialField field(c);
  for (int t = 0; t < 5; ++t) {
    const BoundaryPotential f{mt::random_trace(unit, gen), 1.0};
    const double a = dtn_pairing(unit, field, f);
    const double b = dtn_pairing(big, field, f);
    EXPECT_NEAR(a, b, 1e-10 * a);
  }
}

TEST(PotentialProperties, OrderedLinearFieldsGiveNoNegativeEigenvalues) {
  std::mt19937_64 gen(28);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Discretization disc(build_disk_mesh(1.0, 8));
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> lo(disc.mesh().num_triangles()), hi(lo.size());
    for (std::size_t e = 0; e < lo.size(); ++e) {
      lo[e] = log_uniform(gen, 1.0, 100.0);
      hi[e] = lo[e] * (1.0 + (u(gen) < 0.5 ? 0.0 : 10 * u(gen)));
    }
    const DtNMatrix k_hi = schur_dtn_matrix(disc, MaterialField(hi));
    const DtNMatrix k_lo = schur_dtn_matrix(disc, MaterialField(lo));
    EXPECT_TRUE(negative_eigenspace(k_hi, k_lo, 3).empty());
  }
}

TEST(PotentialProperties, FictitiousAnomaliesNeverTouchT) {
  const Mesh mesh = build_disk_mesh(1.0, 16);
  const TestGrid grid = build_test_grid(1.0, {6, 0.95});
  for (const auto& T : grid.cells) {
    const ElementMask mt_ = classify_elements(mesh, T);
    for (auto style : {FictitiousStyle::ConvexTangent, FictitiousStyle::ConcavePair}) {
      for (const Region& F : fictitious_anomalies(T, mesh, style, 8)) {
        const ElementMask mf = classify_elements(mesh, F);
        for (std::size_t e = 0; e < mf.size(); ++e) ASSERT_FALSE(mf[e] && mt_[e]);
      }
    }
  }
}

// Every generated potential separates an anomaly inside F from T.
TEST(PotentialProperties, GeneratedPotentialsSeparate) {
  const Discretization disc(build_disk_mesh(kR, 12));
  const auto n = disc.mesh().num_triangles();
  const MaterialField bg = MaterialField::uniform(n, kBg);
  const MaterialLaw law = laws::superconducting_mixture();
  const TestGrid grid = build_test_grid(kR, {4, 0.95});
  int checked = 0;
  for (int i : {0, 5, 10, 15}) {
    const Region& T = grid.cells[i];
    const MaterialField t_field = test_anomaly_field(disc.mesh(), T, law, bg, Regime::Separated);
    for (const Region& F : fictitious_anomalies(T, disc.mesh(), FictitiousStyle::ConvexTangent, 4)) {
      const BoundingLaws b = build_bounding_laws(disc.mesh(), T, F, kBounds, bg, Regime::Separated);
      const DtNMatrix k_fu = schur_dtn_matrix(disc, b.gamma_F_u);
      const DtNMatrix k_tl = schur_dtn_matrix(disc, b.gamma_T_l);
      const PairOutcome out = synthesize_pair(disc, k_fu, k_tl, t_field, {}, i, 0);
      // A: the part of F inside the disk, and a smaller piece of it.
      const ElementMask in_f = classify_elements(disc.mesh(), F);
      std::vector<ElementMask> anomalies = {in_f, in_f};
      int dropped = 0;
      for (std::size_t e = 0; e < n && dropped < 20; ++e) {
        if (anomalies[1][e]) anomalies[1][e] = 0, ++dropped;
      }
      for (const TestPotential& p : out.potentials) {
        const double t_energy = avg_dtn_pairing(disc, t_field, p.scaled());
        for (const ElementMask& a : anomalies) {
          const MaterialField a_field = MaterialField::with_anomaly(std::vector<double>(n, kBg), a, law);
          EXPECT_LT(avg_dtn_pairing(disc, a_field, p.scaled()), t_energy);
          ++checked;
        }
      }
    }
  }
  EXPECT_GT(checked, 20);
}

TEST(InversionProperties, CellsInsideAnAreNeverDiscarded) {
  Scenario s;
  s.disc = std::make_shared<Discretization>(build_disk_mesh(kR, 12));
  s.background = kBg;
  s.law = laws::superconducting_mixture();
  s.bounds = kBounds;
  s.transducer_k = 1e-2;
  PipelineOptions o;
  o.grid.n = 4;
  o.max_reading = 20.0;
  const Precomputed pre = precompute(s, o);
  const std::vector<int> inside = {5, 6, 9, 10};
  s.anomaly = Region::union_of({pre.grid.cells[5], pre.grid.cells[6], pre.grid.cells[9], pre.grid.cells[10]});
  const auto clean = simulate_readings(s, pre.potentials);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const MeasurementTable m = apply_noise_all(clean, NoiseModel::keithley_2002(seed));
    const ReconstructionResult r = reconstruct(pre.responses, m, s.transducer_k, 16);
    for (int i : inside) ASSERT_TRUE(r.verdicts[i].kept) << "seed " << seed << " cell " << i;
  }
}
