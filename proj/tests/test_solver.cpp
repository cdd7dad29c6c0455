#include "doctest.h"
#include "dnls/solver.hpp"
#include "test_support.hpp"

using namespace dnls;
using namespace dnls::test;

namespace {

SolutionState integrate(const SystemSpec& spec, SolutionState s, double t_end, double dt) {
  LawsonIntegrator integ(spec, s);
  const long steps = std::lround(t_end / dt);
  for (long i = 0; i < steps; ++i) integ.step(dt);
  return integ.state();
}

double state_diff(const SolutionState& a, const SolutionState& b) {
  double d = 0;
  for (std::size_t j = 0; j < a.fields.size(); ++j) d = std::max(d, l2_norm(a.fields[j] - b.fields[j]));
  return d;
}

SolutionState packets(const Grid& g, double amplitude, std::uint64_t seed, int components) {
  SolutionState s;
  for (int j = 0; j < components; ++j) s.fields.push_back(amplitude * random_packets(g, seed + j, 3, 2));
  return s;
}

}  // namespace

TEST_CASE("linear flow is exact over many steps") {
  const Grid g(512, 40.0);
  const Mass m(Rational(3, 2));
  const SystemSpec free(std::vector<Mass>{m}, {});
  const Field u0 = random_packets(g, 5);
  LawsonIntegrator integ(free, SolutionState{0, {u0}});
  for (int i = 0; i < 10000; ++i) integ.step(1e-3);
  const Field expect = free_evolve(u0, m, 10.0);
  CHECK(rel_l2(integ.state().fields[0], expect) < 1e-11);
  CHECK(integ.time() == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("fourth-order convergence for each built-in system") {
  const Grid g(256, 30.0);
  struct Case {
    SystemSpec spec;
    double amplitude;
  };
  const std::vector<Case> cases = {
      {build_nls3(Mass(1.0), Mass(2.0), {1, 0.3}, {0.5, -1}), 0.6},
      {build_nls2(Mass(1.0), Mass(4.0), {1, 0}, {-0.7, 0.2}), 0.8},
      {build_single_cubic(), 1.0},
  };
  for (const auto& c : cases) {
    const SolutionState s0 = packets(g, c.amplitude, 17, c.spec.components());
    const SolutionState ref = integrate(c.spec, s0, 1.0, 1.0 / 640);
    std::vector<double> err;
    for (double dt : {1.0 / 10, 1.0 / 20, 1.0 / 40}) err.push_back(state_diff(integrate(c.spec, s0, 1.0, dt), ref));
    CAPTURE(to_string(c.spec.kind()));
    CAPTURE(err[0]);
    CAPTURE(err[2]);
    CHECK(err[2] > 0);
    const double order1 = std::log2(err[0] / err[1]), order2 = std::log2(err[1] / err[2]);
    CHECK(order1 > 3.6);
    CHECK(order2 > 3.6);
    CHECK(order2 < 4.6);
  }
}

TEST_CASE("constant data follows the cubic ODE") {
  const Grid g(64, 10.0);
  const std::complex<double> a(0.8, -0.5);
  const Field u0 = sample_field(g, [&](double) { return a; });
  const SolutionState out = integrate(build_single_cubic(), SolutionState{0, {u0}}, 5.0, 0.01);
  const std::complex<double> expect = a * std::polar(1.0, -std::norm(a) * 5.0);
  double err = 0;
  for (Index n = 0; n < g.size(); ++n) err = std::max(err, std::abs(out.fields[0][n] - expect));
  CHECK(err < 1e-8);
}

TEST_CASE("kappa = 0 leaves u on the free flow") {
  const Grid g(512, 40.0);
  const SystemSpec spec = build_nls3(Mass(1.0), Mass(2.0), 0.0, 1.0);
  const SolutionState s0 = packets(g, 0.5, 3, 2);
  const SolutionState out = integrate(spec, s0, 4.0, 0.01);
  CHECK(rel_l2(out.fields[0], free_evolve(s0.fields[0], spec.mass(0), 4.0)) < 1e-12);
  CHECK(rel_l2(out.fields[1], free_evolve(s0.fields[1], spec.mass(1), 4.0)) > 1e-4);
}

TEST_CASE("single cubic conserves mass") {
  const Grid g(512, 40.0);
  const SolutionState s0 = packets(g, 1.0, 8, 1);
  const SolutionState out = integrate(build_single_cubic(), s0, 5.0, 0.005);
  CHECK(std::abs(l2_norm(out.fields[0]) / l2_norm(s0.fields[0]) - 1) < 1e-9);
}

TEST_CASE("run lands snapshots exactly and records diagnostics") {
  const Grid g(256, 30.0);
  const SystemSpec spec = build_nls3(Mass(1.0), Mass(2.0), 1.0, 1.0);
  const SolutionState s0 = packets(g, 0.05, 1, 2);
  RunConfig cfg;
  cfg.dt = 0.03;
  cfg.t_end = 1.0;
  cfg.snapshot_times = {0.0, 0.1, 0.25, 0.5, 1.0};
  std::vector<double> seen;
  const RunResult r = run(s0, spec, cfg, [&](const SolutionState& s) { seen.push_back(s.time); });
  CHECK(seen == cfg.snapshot_times);
  REQUIRE(r.diagnostics.size() == 5);
  CHECK(r.diagnostics[0].components[0].l2 == doctest::Approx(l2_norm(s0.fields[0])).epsilon(1e-14));
  CHECK(r.final_state.time == 1.0);
  CHECK(r.diagnostics[0].components[0].J_h1 > 0);

  cfg.snapshot_times = {0.5};
  seen.clear();
  const RunResult r2 = run(s0, spec, cfg, [&](const SolutionState& s) { seen.push_back(s.time); });
  CHECK(seen == std::vector<double>{0.5});
  CHECK(r2.final_state.time == 1.0);
}

TEST_CASE("E scales linearly with small data") {
  const Grid g(1024, 100.0);
  const SystemSpec spec = build_nls3(Mass(1.0), Mass(2.0), 1.0, 1.0);
  RunConfig cfg;
  cfg.dt = 0.02;
  cfg.t_end = 4;
  cfg.snapshot_times = {0.0, 2.0, 4.0};
  std::vector<std::vector<double>> E;
  for (double eps : {0.005, 0.01, 0.02}) {
    SolutionState s0{0, {eps * gaussian(g, 2.0), eps * gaussian(g, 1.0)}};
    const RunResult r = run(s0, spec, cfg);
    std::vector<double> e;
    for (const auto& d : r.diagnostics) e.push_back(d.E_value / eps);
    E.push_back(e);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(E[1][i] == doctest::Approx(E[0][i]).epsilon(1e-3));
    CHECK(E[2][i] == doctest::Approx(E[0][i]).epsilon(1e-2));
  }
}

TEST_CASE("boundary mass aborts with the last good state") {
  const Grid g(256, 20.0);
  const SystemSpec spec = build_nls3(Mass(1.0), Mass(2.0), 1.0, 1.0);
  // a packet moving right at speed 4 reaches |x| >= 18 near t = 4
  SolutionState s0{0, {0.01 * gaussian(g, 1.0, 0, 4.0), 0.01 * gaussian(g, 1.0)}};
  RunConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 10;
  cfg.snapshot_times = {0.0};
  try {
    run(s0, spec, cfg);
    FAIL("expected an abort");
  } catch (const SolverAbort& e) {
    CHECK(e.reason() == SolverAbort::Reason::boundary);
    CHECK(e.last_good_state().time > 1.0);
    CHECK(e.last_good_state().time < 5.0);
    CHECK(boundary_mass_fraction(e.last_good_state().fields) <= cfg.boundary_mass_threshold);
  }
}

TEST_CASE("an unstable step size aborts as blow-up") {
  const Grid g(256, 20.0);
  const SystemSpec spec = build_nls3(Mass(1.0), Mass(2.0), 1.0, 1.0);
  SolutionState s0{0, {30 * gaussian(g, 0.5), 30 * gaussian(g, 0.5)}};
  RunConfig cfg;
  cfg.dt = 0.5;
  cfg.t_end = 500;
  cfg.boundary_mass_threshold = 0.999;
  CHECK_THROWS_AS(run(s0, spec, cfg), SolverAbort);
  try {
    run(s0, spec, cfg);
  } catch (const SolverAbort& e) {
    CHECK(e.reason() == SolverAbort::Reason::blowup);
  }
}

TEST_CASE("config validation and snapshot schedules") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.dt = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = RunConfig{};
  cfg.gamma = 0.3;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = RunConfig{};
  cfg.snapshot_times = {1, 1};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.snapshot_times = {300};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  const auto t = log_snapshot_times(1, 100, 4);
  REQUIRE(t.size() == 10);
  CHECK(t[0] == 0);
  CHECK(t[1] == 1);
  CHECK(t.back() == 100);
  for (std::size_t i = 2; i < t.size(); ++i) CHECK(t[i] / t[i - 1] == doctest::Approx(std::pow(10.0, 0.25)));
  CHECK(log_snapshot_times(1, 150, 1).back() == 150);
}

TEST_CASE("boundary and tail fractions") {
  const Grid g(128, 10.0);
  CHECK(boundary_mass_fraction({gaussian(g, 0.5)}) < 1e-30);
  Field edge(g);
  edge[0] = 1;
  edge[64] = 1;
  CHECK(boundary_mass_fraction({edge}) == doctest::Approx(0.5));
  CHECK(spectral_tail_fraction({gaussian(g, 1.0)}) < 1e-20);
  const Field top = sample_field(g, [&](double x) { return std::polar(1.0, 60 * g.frequency_spacing() * x); });
  CHECK(spectral_tail_fraction({top}) == doctest::Approx(1.0));
}
