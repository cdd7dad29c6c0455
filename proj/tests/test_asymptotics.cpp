#include "doctest.h"
#include "dnls/asymptotics.hpp"
#include "test_support.hpp"

using namespace dnls;
using namespace dnls::test;

namespace {

std::complex<double> closed_form_constant(double m, double S, double t) {
  const std::complex<double> z = std::abs(S) * t / std::complex<double>(1, -t * S);
  return std::sqrt(z) * std::polar(1.0, -pi / 4 * (m > 0 ? 1 : -1));
}

Spectrum gaussian_spectrum(const Grid& g, std::complex<double> a) {
  return sample_spectrum(g, [&](double xi) { return a * std::exp(-xi * xi / 2); });
}

}  // namespace

TEST_CASE("fit_decay recovers power laws") {
  const std::vector<double> t = log_spaced(1, 1000, 40);
  for (double p : {-0.5, -0.75, 0.3}) {
    std::vector<double> v;
    for (double s : t) v.push_back(2.5 * std::pow(s, p));
    const DecayFit f = fit_decay(t, v, 1, 1000);
    CHECK(std::abs(f.exponent - p) < 1e-12);
    CHECK(std::abs(f.intercept - std::log(2.5)) < 1e-11);
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK(f.samples == 40);
    CHECK(f.predict(10) == doctest::Approx(2.5 * std::pow(10, p)));
  }
  std::vector<double> flat(t.size(), 3.0);
  CHECK(std::abs(fit_decay(t, flat, 1, 1000).exponent) < 1e-14);

  std::vector<double> wobble;
  for (double s : t) wobble.push_back(std::pow(s, -0.6) * (1 + 0.01 * std::sin(std::log(s))));
  CHECK(std::abs(fit_decay(t, wobble, 1, 1000).exponent + 0.6) < 0.01);

  const DecayFit windowed = fit_decay(t, wobble, 10, 100);
  CHECK(windowed.t_lo == 10);
  CHECK(windowed.samples < 40);

  std::vector<double> bad = flat;
  bad[5] = 0;
  CHECK_THROWS_AS(fit_decay(t, bad, 1, 1000), std::domain_error);
  try {
    fit_decay(t, flat, 500, 1000);
    FAIL("expected a sample-count error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("at least 8") != std::string::npos);
  }
}

TEST_CASE("profiles of free solutions are time invariant and isometric") {
  const Grid g(2048, 200.0);
  const Mass m(Rational(2, 3));
  const Field u0 = random_packets(g, 21, 3, 2);
  const ProfileData p0 = extract_profile(SolutionState{0, {u0}}, m, 0);
  CHECK(std::abs(l2_norm(p0.values) / l2_norm(u0) - 1) < 1e-10);
  for (double t : {1.0, 7.5, 30.0}) {
    const Field ut = free_evolve(u0, m, t);
    const ProfileData p = extract_profile(SolutionState{t, {ut}}, m, 0);
    CHECK(p.time == t);
    CHECK(max_abs_diff(p.values.values(), p0.values.values()) < 1e-10);
    CHECK(std::abs(l2_norm(p.values) / l2_norm(ut) - 1) < 1e-10);
  }
}

TEST_CASE("weighted profile sup") {
  const Grid g(256, 20.0);
  const Spectrum a = gaussian_spectrum(g, 0.1);
  const Spectrum b(g);
  CHECK(weighted_profile_sup({{0, 0, a}, {0, 1, b}}) == doctest::Approx(0.1));
  // <xi> xi^2 e^{-xi^2/2} peaks at xi^2 = 1 + sqrt3, inside the band
  const Spectrum c = sample_spectrum(g, [](double xi) { return xi * xi * std::exp(-xi * xi / 2); });
  const double x = 1 + std::sqrt(3.0);
  CHECK(weighted_profile_sup({{0, 0, c}}, 2.0) == doctest::Approx(std::sqrt(1 + x) * x * std::exp(-x / 2)).epsilon(1e-2));
  const double edge = 6 * g.frequency_spacing();
  CHECK(weighted_profile_sup({{0, 0, c}}, edge * (1 + 1e-12)) ==
        doctest::Approx(std::sqrt(1 + edge * edge) * edge * edge * std::exp(-edge * edge / 2)).epsilon(1e-12));
  CHECK(weighted_profile_sup({}) == 0);
}

TEST_CASE("stationary phase constant against closed form and quadrature") {
  struct Case {
    double m, S;
  };
  for (const Case c : {Case{1, 6}, Case{2, 3}, Case{1, -2}, Case{-1, 3}, Case{1, 0.4}}) {
    CAPTURE(c.m);
    CAPTURE(c.S);
    // the constant settles like 1/(4 |S| t)
    const double t = std::max(100.0, 500 / std::abs(c.S));
    const StationaryPhaseResult r = stationary_phase_constant(Mass(c.m), c.S, t);
    CHECK(r.relative_change < 1e-3);
    CHECK(std::abs(r.constant - closed_form_constant(c.m, c.S, 2 * t)) < 1e-8);
    CHECK(std::abs(r.constant - stationary_phase_quadrature(c.m, c.S, 2 * t)) < 1e-8);
  }
  for (double t : {50.0, 100.0, 200.0}) {
    const StationaryPhaseResult r = stationary_phase_constant(Mass(1.0), 6, t);
    CHECK(std::abs(std::abs(r.constant) - 1) < 1e-3);
  }
  CHECK_THROWS_AS(stationary_phase_constant(Mass(1.0), 1.0, 100), std::domain_error);
  CHECK_THROWS_AS(stationary_phase_constant(Mass(1.0), 0.0, 100), std::domain_error);
  CHECK_THROWS_AS(stationary_phase_constant(Mass(1.0), 6.0, 2), std::runtime_error);
}

TEST_CASE("reduced model structure") {
  const SystemSpec nls3 = build_nls3(Mass(1.0), Mass(2.0), {0.5, 0.5}, 1.0);
  const ReducedModel model = build_reduced_model(nls3);
  const ResonanceReport report = classify(nls3);
  REQUIRE(model.terms.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::abs(model.terms[i].omega - *report.terms[i].omega) < 1e-12);
    CHECK(model.terms[i].omega != 0);
    CHECK(std::isfinite(std::abs(model.terms[i].gamma)));
    CHECK(std::abs(model.terms[i].gamma) > 0.5);
  }
  CHECK(model.terms[0].ratio == doctest::Approx(1.0 / 6));
  CHECK(model.terms[1].ratio == doctest::Approx(2.0 / 3));

  const ReducedModel cubic = build_reduced_model(build_single_cubic());
  CHECK(cubic.terms[0].omega == 0);
  CHECK(cubic.terms[0].gamma == std::complex<double>(1));

  CHECK_THROWS_AS(build_reduced_model(build_nls2(Mass(1.0), Mass(2.0), 1.0, 1.0)), std::domain_error);
}

TEST_CASE("reduced model with zero profiles stays at zero") {
  const Grid g(256, 40.0);
  const ReducedModel model = build_reduced_model(build_nls3(Mass(1.0), Mass(2.0), 1.0, 1.0));
  const ProfileSet zero{Spectrum(g), Spectrum(g)};
  const ProfileSet out = reduced_step(model, zero, 5, 0.1);
  CHECK(out[0].values().abs().maxCoeff() == 0);
  CHECK(out[1].values().abs().maxCoeff() == 0);
  CHECK_THROWS_AS(reduced_step(model, zero, 0.5, 0.1), std::invalid_argument);
}

TEST_CASE("gauge-invariant reduced model keeps the modulus") {
  const Grid g(256, 40.0);
  const ReducedModel model = build_reduced_model(build_single_cubic());
  const ProfileSet a0{gaussian_spectrum(g, {0.4, 0.3})};
  const ProfileSet a1 = reduced_integrate(model, a0, 1, 11, 0.01);
  CHECK(max_abs_diff(a1[0].values().abs().cast<std::complex<double>>(),
                     a0[0].values().abs().cast<std::complex<double>>()) < 1e-6 * 10);
  // phase follows -|a|^2 log t exactly for this ODE
  const std::complex<double> expect = a0[0][g.size() / 2] * std::polar(1.0, -0.25 * std::log(11.0));
  CHECK(std::abs(a1[0][g.size() / 2] - expect) < 1e-8);
}

TEST_CASE("scattering state of a free solution") {
  const Grid g(256, 40.0);
  const Spectrum a = gaussian_spectrum(g, 0.2);
  std::vector<ProfileData> series;
  for (double t : log_spaced(1, 16, 12)) series.push_back({t, 0, a});
  const ScatteringEstimate est = scattering_state(series, 1, 16);
  CHECK(max_abs_diff(est.alpha_plus.values(), a.values()) == 0);
  for (double e : est.l2_error) CHECK(e == 0);
  CHECK(est.monotone);
  series.erase(series.begin() + 6, series.end());
  CHECK_THROWS_AS(scattering_state(series, 1, 16), std::invalid_argument);
}

TEST_CASE("scattering state fit on a synthetic approach") {
  const Grid g(256, 40.0);
  const Spectrum a = gaussian_spectrum(g, 0.2);
  const Spectrum bump = gaussian_spectrum(g, 1.0);
  std::vector<ProfileData> series;
  const double T = 1000;
  for (double t : log_spaced(1, T, 30)) {
    const double w = std::pow(t, -0.25) - std::pow(T, -0.25);
    series.push_back({t, 0, a + bump * std::complex<double>(w)});
  }
  const ScatteringEstimate est = scattering_state(series, 1, 50);
  CHECK(est.convergence.exponent == doctest::Approx(-0.25).epsilon(0.1));
  CHECK(est.monotone);
}

TEST_CASE("profile error of a free solution decays") {
  const Grid g(2048, 400.0);
  const Mass m(1.0);
  const Field u0 = gaussian(g, 1.0);
  const Spectrum a = extract_profile(SolutionState{0, {u0}}, m, 0).values;
  std::vector<double> t = log_spaced(5, 40, 10), e;
  for (double s : t) e.push_back(profile_error_linf(free_evolve(u0, m, s), s, m, a));
  CHECK(fit_decay(t, e, 5, 40).exponent <= -0.70);
  CHECK_THROWS_AS(profile_error_linf(u0, 0.5, m, a), std::invalid_argument);
}

TEST_CASE("conserved-combination monitor") {
  const Grid g(256, 40.0);
  const Mass m(Rational(1)), mu(Rational(3));
  std::vector<ProfileData> zero{{1, 0, Spectrum(g)}, {2, 0, Spectrum(g)}};
  const ConservationSeries z = resonant_conserved_monitor(zero, zero, m, mu, 1.0, -1.0);
  CHECK(z.max_drift == 0);
  CHECK(z.c == 1);

  // exchange |alpha|^2 into |beta|^2 with weight c = 2
  const Spectrum base = gaussian_spectrum(g, 0.1);
  std::vector<ProfileData> a, b;
  for (double s : {0.0, 0.3, 0.6}) {
    a.push_back({1 + s, 0, base * std::complex<double>(std::sqrt(1 - s))});
    b.push_back({1 + s, 1, base * std::complex<double>(std::sqrt(2 * s))});
  }
  const ConservationSeries r = resonant_conserved_monitor(a, b, m, mu, {0, 1}, {0, 2});
  CHECK(r.c == doctest::Approx(2));
  CHECK(r.max_drift < 1e-14);
  CHECK(r.max_balanced_drift > 0.1);

  CHECK_THROWS_AS(resonant_conserved_monitor(a, b, m, mu, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(resonant_conserved_monitor(a, b, m, mu, 1.0, {-1, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(resonant_conserved_monitor(a, b, m, Mass(Rational(5, 2)), 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("growth monitor verdicts") {
  const std::vector<double> t = log_spaced(1, 400, 40);
  std::vector<double> grow, flat, bump;
  for (double s : t) {
    grow.push_back(1 + 0.1 * std::log(s));
    flat.push_back(1 + 0.001 * std::sin(s));
    bump.push_back(s < 100 ? 1 + s / 100 : 2 - (s - 100) / 1000);
  }
  const GrowthVerdict g = blowup_monitor(t, grow);
  CHECK(g.growing);
  CHECK(g.relative_growth == doctest::Approx(0.1 * std::log(40.0) / (1 + 0.1 * std::log(t[16]))).epsilon(0.05));
  const GrowthVerdict f = blowup_monitor(t, flat);
  CHECK_FALSE(f.growing);
  CHECK(f.relative_variation < 0.003);
  CHECK_FALSE(blowup_monitor(t, bump).growing);
}

TEST_CASE("phase drift fit on synthetic profiles") {
  const Grid g(256, 40.0);
  const std::complex<double> a(0.3, 0.1);
  std::vector<ProfileData> drifting, still;
  for (double t : log_spaced(1, 200, 60)) {
    drifting.push_back({t, 0, sample_spectrum(g, [&](double xi) {
                          const std::complex<double> v = a * std::exp(-xi * xi / 2);
                          return v * std::polar(1.0, -std::norm(v) * std::log(t));
                        })});
    still.push_back({t, 0, gaussian_spectrum(g, a)});
  }
  for (double xi : {0.0, 0.5, 1.2}) {
    const PhaseDriftFit f = modified_scattering_check(drifting, xi, 1, 200);
    CHECK(f.slope == doctest::Approx(f.predicted_slope).epsilon(1e-9));
    CHECK(f.modulus_variation < 1e-12);
  }
  CHECK(std::abs(modified_scattering_check(still, 0, 1, 200).slope) < 1e-12);

  std::vector<ProfileData> sparse;
  for (double t : {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0})
    sparse.push_back({t, 0, gaussian_spectrum(g, a * std::polar(1.0, 2.0 * t))});
  CHECK_THROWS_AS(modified_scattering_check(sparse, 0, 1, 10), std::runtime_error);
}
