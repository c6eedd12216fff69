#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "monotomo/inversion.hpp"

namespace monotomo {

namespace {

void note(const PipelineOptions& opt, const std::string& msg) {
  if (opt.progress) opt.progress(msg);
}

const Discretization& measurement_mesh(const Scenario& s) { return s.measurement_disc ? *s.measurement_disc : *s.disc; }

MaterialField anomaly_field(const Scenario& s, const Mesh& mesh) {
  return MaterialField::with_anomaly(std::vector<double>(mesh.num_triangles(), s.background),
                                     classify_elements(mesh, s.anomaly), s.law, OutsideRule::Background);
}

double reading_on(const Scenario& s, const MaterialField& field, const TestPotential& p, const SolverOptions& opt) {
  const Discretization& md = measurement_mesh(s);
  BoundaryPotential f = p.scaled();
  if (s.measurement_disc) f.values = transfer_trace(s.disc->mesh(), md.mesh(), p.trace);
  return s.transducer_k * avg_dtn_pairing(md, field, f, opt);
}

}  // namespace

std::string to_string(Physics p) {
  switch (p) {
    case Physics::SteadyCurrents: return "steady-currents";
    case Physics::Magnetostatic: return "magnetostatic";
    case Physics::Electrostatic: return "electrostatic";
  }
  return "unknown";
}

Physics physics_from_string(const std::string& s) {
  if (s == "steady-currents") return Physics::SteadyCurrents;
  if (s == "magnetostatic") return Physics::Magnetostatic;
  if (s == "electrostatic") return Physics::Electrostatic;
  throw std::invalid_argument("unknown physics '" + s + "'");
}

MaterialField Scenario::background_field() const {
  if (!disc) throw std::logic_error("scenario has no mesh");
  return MaterialField::uniform(disc->mesh().num_triangles(), background);
}

double Scenario::lower_coefficient() const {
  if (regime == Regime::Separated) return bounds.lower;
  if (!(s_m > 0.0)) throw std::invalid_argument("intersecting regime needs a positive s_M");
  return lower_bound_on_range(law, s_m);
}

std::vector<std::string> validate_scenario(const Scenario& s, int grid_size) {
  std::vector<std::string> problems;
  if (!s.disc) problems.emplace_back("no mesh");
  if (!(s.background > 0.0)) problems.emplace_back("background must be positive");
  if (!(s.transducer_k > 0.0)) problems.emplace_back("transducer constant must be positive");
  if (!(s.bounds.lower > 0.0 && s.bounds.lower <= s.bounds.upper)) problems.emplace_back("bounds need 0 < lower <= upper");
  const AssumptionReport rep = verify_assumptions(s.law, s.s_check, grid_size);
  if (!rep.h2_ok) problems.emplace_back("gamma(s) s is not strictly increasing on the scan grid");
  const double slack = 1e-9;
  if (rep.h3_bounds.lower < s.bounds.lower * (1.0 - slack)) problems.emplace_back("law drops below the lower bound");
  if (rep.h3_bounds.upper > s.bounds.upper * (1.0 + slack)) problems.emplace_back("law exceeds the upper bound");
  if (s.bounds.upper < s.background) problems.emplace_back("upper bound is below the background");
  if (s.regime == Regime::Separated) {
    if (!(s.bounds.lower > s.background)) problems.emplace_back("separated regime needs lower bound above background");
  } else {
    if (!(s.s_m > 0.0)) {
      problems.emplace_back("intersecting regime needs s_M > 0");
    } else {
      if (auto s0 = intersection_s0(s.law, s.background, s.s_check); s0 && s.s_m >= *s0) {
        problems.emplace_back("s_M must lie below the first crossing s0");
      }
      if (!(lower_bound_on_range(s.law, s.s_m) > s.background)) {
        problems.emplace_back("gamma_l must exceed the background");
      }
    }
  }
  return problems;
}

Vec2 TestGrid::cell_center(int i) const {
  const int row = i / n, col = i % n;
  const double side = cell_side();
  return {-half_side + (col + 0.5) * side, half_side - (row + 0.5) * side};
}

TestGrid build_test_grid(double radius, const GridSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("grid size must be positive");
  if (!(spec.roi_fraction > 0.0 && spec.roi_fraction < 1.0)) {
    throw std::invalid_argument("ROI fraction must lie in (0, 1)");
  }
  TestGrid g;
  g.n = spec.n;
  g.half_side = spec.roi_fraction * radius / std::numbers::sqrt2;
  const double side = g.cell_side();
  for (int i = 0; i < spec.n * spec.n; ++i) {
    const Vec2 c = g.cell_center(i);
    const Vec2 h(0.5 * side, 0.5 * side);
    g.cells.push_back(Region::rectangle(c - h, c + h));
  }
  return g;
}

NoiseModel NoiseModel::keithley_2002(std::uint64_t seed) {
  return {{{0.2, 3.5e-6, 3.0e-6}, {2.0, 1.2e-6, 0.3e-6}, {20.0, 1.2e-6, 0.1e-6}}, seed};
}

NoiseModel NoiseModel::noiseless() { return {{{std::numeric_limits<double>::infinity(), 0.0, 0.0}}, 0}; }

const NoiseRange& NoiseModel::select(double m) const {
  for (const auto& r : ranges) {
    if (std::abs(m) <= r.range) return r;
  }
  std::ostringstream os;
  os << "reading " << m << " exceeds the largest range";
  throw RangeOverflow(os.str());
}

double NoiseModel::max_range() const {
  return ranges.empty() ? 0.0 : ranges.back().range;
}

double simulate_reading(const Scenario& scenario, const TestPotential& potential, const SolverOptions& options) {
  return reading_on(scenario, anomaly_field(scenario, measurement_mesh(scenario).mesh()), potential, options);
}

Measurement apply_noise(double clean, const NoiseModel& noise, const PotentialKey& key) {
  const NoiseRange& r = noise.select(clean);
  Measurement m;
  m.clean = clean;
  m.range = r;
  if (r.eta1 == 0.0 && r.eta2 == 0.0) {
    m.value = clean;
    return m;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(noise.seed), static_cast<std::uint32_t>(noise.seed >> 32),
                    static_cast<std::uint32_t>(key.i), static_cast<std::uint32_t>(key.j),
                    static_cast<std::uint32_t>(key.k)};
  std::mt19937_64 gen(seq);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double xi1 = u(gen);
  const double xi2 = u(gen);
  m.value = clean * (1.0 + r.eta1 * xi1) + r.eta2 * xi2 * r.range;
  return m;
}

Measurement measure(const Scenario& scenario, const TestPotential& potential, const NoiseModel& noise,
                    const SolverOptions& options) {
  return apply_noise(simulate_reading(scenario, potential, options), noise, key_of(potential));
}

ResponseTable precompute_responses(const Scenario& scenario, const std::vector<Region>& tests,
                                   const std::vector<TestPotential>& potentials, int jobs, bool recompute,
                                   const SolverOptions& options) {
  const Mesh& mesh = scenario.disc->mesh();
  const MaterialField bg = scenario.background_field();
  std::vector<std::unique_ptr<MaterialField>> fields(tests.size());
  std::vector<double> values(potentials.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<std::once_flag> once(tests.size());
  parallel_for(potentials.size(), jobs, [&](std::size_t n) {
    const TestPotential& p = potentials[n];
    if (p.i < 0 || static_cast<std::size_t>(p.i) >= tests.size()) throw std::out_of_range("potential refers to unknown test anomaly");
    if (!recompute && std::isfinite(p.response)) {
      values[n] = p.response;
      return;
    }
    std::call_once(once[p.i], [&] {
      fields[p.i] = std::make_unique<MaterialField>(test_anomaly_field(mesh, tests[p.i], scenario.law, bg, scenario.regime));
    });
    try {
      values[n] = avg_dtn_pairing(*scenario.disc, *fields[p.i], p.scaled(), options);
    } catch (const ConvergenceFailure&) {
    } catch (const NumericalFailure&) {
    }
  });
  ResponseTable table;
  for (std::size_t n = 0; n < potentials.size(); ++n) {
    if (std::isfinite(values[n])) table[key_of(potentials[n])] = values[n];
  }
  return table;
}

std::vector<std::uint8_t> ReconstructionResult::kept_flags() const {
  std::vector<std::uint8_t> out(verdicts.size());
  for (std::size_t i = 0; i < verdicts.size(); ++i) out[i] = verdicts[i].kept ? 1 : 0;
  return out;
}

ReconstructionResult reconstruct(const ResponseTable& responses, const MeasurementTable& measurements,
                                 double transducer_k, int num_tests, const std::vector<ElementMask>& test_masks,
                                 std::uint64_t seed) {
  if (num_tests < 0) throw std::invalid_argument("reconstruct: negative test count");
  if (!test_masks.empty() && static_cast<int>(test_masks.size()) != num_tests) {
    throw std::invalid_argument("reconstruct: one element mask per test anomaly");
  }
  ReconstructionResult out;
  out.seed = seed;
  out.verdicts.assign(num_tests, Verdict{true, std::numeric_limits<double>::infinity(), {}, 0, 0});
  for (const auto& [key, resp] : responses) {
    if (key.i < 0 || key.i >= num_tests) throw std::out_of_range("reconstruct: test index out of range");
    Verdict& v = out.verdicts[key.i];
    auto it = measurements.find(key);
    if (it == measurements.end()) {
      ++v.skipped;
      continue;
    }
    const Measurement& m = it->second;
    // eta2 = 0 on an unbounded range contributes nothing (avoids 0 * inf).
    const double additive = m.range.eta2 == 0.0 ? 0.0 : m.range.eta2 * m.range.range;
    const double bound = (m.value + additive) / (1.0 - m.range.eta1);
    const double margin = bound - transducer_k * resp;
    ++v.evaluated;
    ++out.potential_count;
    if (margin < v.worst_margin) {
      v.worst_margin = margin;
      v.worst = key;
    }
    if (!(margin >= 0.0)) v.kept = false;
  }
  for (const auto& [key, m] : measurements) {
    if (!responses.count(key) && key.i >= 0 && key.i < num_tests) ++out.verdicts[key.i].skipped;
  }
  if (!test_masks.empty()) {
    out.union_mask.assign(test_masks.front().size(), 0);
    for (int i = 0; i < num_tests; ++i) {
      if (!out.verdicts[i].kept) continue;
      for (std::size_t e = 0; e < out.union_mask.size(); ++e) out.union_mask[e] |= test_masks[i][e];
    }
  }
  return out;
}

Precomputed precompute(const Scenario& scenario, const PipelineOptions& options) {
  if (!scenario.disc) throw std::invalid_argument("scenario has no mesh");
  const Discretization& disc = *scenario.disc;
  const Mesh& mesh = disc.mesh();
  const PotentialSpec& spec = options.potentials;
  Precomputed pre;
  pre.grid = build_test_grid(mesh.radius(), options.grid);
  const std::size_t nt = pre.grid.cells.size();

  pre.fictitious.resize(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    const Region& T = pre.grid.cells[i];
    if (spec.convex) {
      for (auto& f : fictitious_anomalies(T, mesh, FictitiousStyle::ConvexTangent, spec.directions)) {
        pre.fictitious[i].push_back(std::move(f));
      }
    }
    if (spec.concave) {
      for (auto& f : fictitious_anomalies(T, mesh, FictitiousStyle::ConcavePair, spec.directions)) {
        pre.fictitious[i].push_back(std::move(f));
      }
    }
  }

  const MaterialField bg = scenario.background_field();
  const double t_coeff = scenario.lower_coefficient();
  const double gamma_l = scenario.regime == Regime::Intersecting ? t_coeff : 0.0;

  // Linear lower bound per test anomaly.
  note(options, "precompute: lower-bound DtN matrices for " + std::to_string(nt) + " test anomalies");
  std::vector<DtNMatrix> k_tl(nt);
  std::vector<std::unique_ptr<MaterialField>> t_fields(nt);
  parallel_for(nt, options.jobs, [&](std::size_t i) {
    const BoundingLaws b =
        build_bounding_laws(mesh, pre.grid.cells[i], Region::empty(), scenario.bounds, bg, scenario.regime, gamma_l);
    k_tl[i] = schur_dtn_matrix(disc, b.gamma_T_l);
    t_fields[i] = std::make_unique<MaterialField>(
        test_anomaly_field(mesh, pre.grid.cells[i], scenario.law, bg, scenario.regime));
  });

  // Reading cap: <avg Lambda_A(l f), l f> <= l^2/2 f^T K_up f with the largest
  // coefficient everywhere.
  std::function<double(const Eigen::VectorXd&)> initial_lambda;
  Eigen::MatrixXd k_unit;
  if (options.max_reading > 0.0) {
    k_unit = schur_dtn_matrix(disc, MaterialField::uniform(mesh.num_triangles(), 1.0)).k;
    const double c_max = std::max(scenario.bounds.upper, scenario.background);
    const double budget = 0.99 * options.max_reading / scenario.transducer_k;
    initial_lambda = [&, c_max, budget](const Eigen::VectorXd& f) {
      const double q = 0.5 * c_max * f.dot(k_unit * f);
      return std::min(spec.lambda_init, std::sqrt(budget / q));
    };
  }

  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < pre.fictitious[i].size(); ++j) pairs.emplace_back(int(i), int(j));
  }
  pre.stats.pairs = static_cast<int>(pairs.size());
  note(options, "precompute: synthesizing potentials for " + std::to_string(pairs.size()) + " (T, F) pairs");
  std::vector<PairOutcome> outcomes(pairs.size());
  parallel_for(pairs.size(), options.jobs, [&](std::size_t n) {
    const auto [i, j] = pairs[n];
    const BoundingLaws b = build_bounding_laws(mesh, pre.grid.cells[i], pre.fictitious[i][j], scenario.bounds, bg,
                                               scenario.regime, gamma_l);
    const DtNMatrix k_fu = schur_dtn_matrix(disc, b.gamma_F_u);
    outcomes[n] = synthesize_pair(disc, k_fu, k_tl[i], *t_fields[i], spec, i, j, initial_lambda, options.solver);
  });
  for (auto& o : outcomes) {
    if (o.potentials.empty()) ++pre.stats.empty_pairs;
    pre.stats.selection_failures += o.selection_failures;
    for (auto& p : o.potentials) pre.potentials.push_back(std::move(p));
  }
  note(options, "precompute: " + std::to_string(pre.potentials.size()) + " potentials");
  pre.responses = precompute_responses(scenario, pre.grid.cells, pre.potentials, options.jobs, false, options.solver);
  pre.stats.response_failures = static_cast<int>(pre.potentials.size() - pre.responses.size());
  return pre;
}

std::map<PotentialKey, double> simulate_readings(const Scenario& scenario,
                                                 const std::vector<TestPotential>& potentials, int jobs,
                                                 const SolverOptions& options) {
  const MaterialField field = anomaly_field(scenario, measurement_mesh(scenario).mesh());
  std::vector<double> values(potentials.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(potentials.size(), jobs, [&](std::size_t n) {
    try {
      values[n] = reading_on(scenario, field, potentials[n], options);
    } catch (const ConvergenceFailure&) {
    } catch (const NumericalFailure&) {
    }
  });
  std::map<PotentialKey, double> out;
  for (std::size_t n = 0; n < potentials.size(); ++n) {
    if (std::isfinite(values[n])) out[key_of(potentials[n])] = values[n];
  }
  return out;
}

MeasurementTable apply_noise_all(const std::map<PotentialKey, double>& clean, const NoiseModel& noise) {
  MeasurementTable out;
  for (const auto& [key, m] : clean) out[key] = apply_noise(m, noise, key);
  return out;
}

PipelineResult run_pipeline(const Scenario& scenario, const PipelineOptions& options, const NoiseModel& noise) {
  return run_measurement(scenario, precompute(scenario, options), noise, options);
}

PipelineResult run_measurement(const Scenario& scenario, Precomputed pre, const NoiseModel& noise,
                               const PipelineOptions& options) {
  PipelineResult r;
  r.pre = std::move(pre);
  note(options, "measure: " + std::to_string(r.pre.potentials.size()) + " readings");
  r.clean = simulate_readings(scenario, r.pre.potentials, options.jobs, options.solver);
  r.measurements = apply_noise_all(r.clean, noise);
  std::vector<ElementMask> masks;
  for (const auto& c : r.pre.grid.cells) masks.push_back(classify_elements(scenario.disc->mesh(), c));
  r.result = reconstruct(r.pre.responses, r.measurements, scenario.transducer_k,
                         static_cast<int>(r.pre.grid.cells.size()), masks, noise.seed);
  return r;
}

Eigen::VectorXd transfer_trace(const Mesh& from, const Mesh& to, const Eigen::VectorXd& values) {
  const std::size_t nb = from.num_boundary();
  if (static_cast<std::size_t>(values.size()) != nb) throw std::invalid_argument("transfer_trace: size mismatch");
  std::vector<std::pair<double, double>> samples(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const Vec2& p = from.nodes()[from.boundary_nodes()[k]];
    samples[k] = {std::atan2(p.y(), p.x()), values[k]};
  }
  std::sort(samples.begin(), samples.end());
  const double two_pi = 2.0 * std::numbers::pi;
  Eigen::VectorXd out(to.num_boundary());
  for (std::size_t k = 0; k < to.num_boundary(); ++k) {
    const Vec2& p = to.nodes()[to.boundary_nodes()[k]];
    const double t = std::atan2(p.y(), p.x());
    auto it = std::upper_bound(samples.begin(), samples.end(), std::make_pair(t, std::numeric_limits<double>::infinity()));
    const auto& hi = it == samples.end() ? samples.front() : *it;
    const auto& lo = it == samples.begin() ? samples.back() : *(it - 1);
    double t0 = lo.first, t1 = hi.first;
    if (t1 <= t0) t1 += two_pi;
    double tt = t;
    if (tt < t0) tt += two_pi;
    const double w = t1 > t0 ? (tt - t0) / (t1 - t0) : 0.0;
    out[k] = (1.0 - w) * lo.second + w * hi.second;
  }
  return out;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t first_bad = n;
  std::exception_ptr error;
  auto work = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard lock(mu);
        if (k < first_bad) {
          first_bad = k;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace monotomo
