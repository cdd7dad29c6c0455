#include "dnls/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

namespace dnls {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

Field gaussian_packet(const Grid& g, double width, double center = 0, double wavenumber = 0) {
  return sample_field(g, [&](double x) {
    const double y = x - center;
    return std::exp(-y * y / (2 * width * width)) * std::polar(1.0, wavenumber * x);
  });
}

Field random_packets(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1, 1);
  Field f(g);
  for (int p = 0; p < 3; ++p) {
    const double c = 2 * uni(rng), w = 0.7 + 0.5 * (uni(rng) + 1), k = 2 * uni(rng);
    f += std::complex<double>(uni(rng), uni(rng)) * gaussian_packet(g, w, c, k);
  }
  return f;
}

Field random_band_limited(const Grid& g, std::uint64_t seed, Index max_mode) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  ComplexArray<double> c = ComplexArray<double>::Zero(g.size());
  for (Index k = 0; k < g.size(); ++k)
    if (std::abs(g.wavenumber(k)) < max_mode) c[k] = {gauss(rng), gauss(rng)};
  return detail::field_from_series(g, c);
}

double rel_l2(const Field& a, const Field& b) { return l2_norm(a - b) / l2_norm(b); }

// product of three band-limited fields on a grid four times finer, truncated
// back to the band: no aliasing can reach the kept modes
Field fine_grid_product(const std::array<Field, 3>& f, std::array<int, 3> orders) {
  const Grid& g = f[0].grid();
  const Index n = g.size(), big = 4 * n;
  ComplexArray<double> prod = ComplexArray<double>::Ones(big);
  for (int i = 0; i < 3; ++i) {
    const ComplexArray<double> c = detail::series_coefficients(f[i]);
    ComplexArray<double> p = ComplexArray<double>::Zero(big);
    for (Index k = 0; k < n; ++k) {
      const Index w = g.wavenumber(k);
      if (w == -n / 2) continue;
      std::complex<double> v = c[k];
      if (orders[i] == 1) v *= std::complex<double>(0, w * g.frequency_spacing());
      p[w >= 0 ? w : big + w] = v;
    }
    prod *= detail::fft_backward<double>(p);
  }
  const ComplexArray<double> c = detail::fft_forward<double>(prod) / static_cast<double>(big);
  ComplexArray<double> out = ComplexArray<double>::Zero(n);
  for (Index k = 0; k < n; ++k) {
    const Index w = g.wavenumber(k);
    if (w != -n / 2) out[k] = c[w >= 0 ? w : big + w];
  }
  return detail::field_from_series(g, out);
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) t[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return t;
}

// sup over |xi| <= band of |a - b|, relative to sup |b|
double band_relative_linf(const Spectrum& a, const Spectrum& b, double band) {
  const Grid& g = b.grid();
  double num = 0, den = 0;
  for (Index i = 0; i < g.size(); ++i) {
    if (std::abs(g.frequency(i)) > band) continue;
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den > 0 ? num / den : num;
}

std::size_t nearest_snapshot(const Simulation& sim, double t) {
  std::size_t best = 0;
  for (std::size_t k = 0; k < sim.states.size(); ++k)
    if (std::abs(sim.states[k].time - t) < std::abs(sim.states[best].time - t)) best = k;
  return best;
}

std::vector<ProfileData> window(const std::vector<ProfileData>& series, double lo, double hi) {
  std::vector<ProfileData> out;
  for (const auto& p : series)
    if (p.time >= lo && p.time <= hi) out.push_back(p);
  return out;
}

}  // namespace

SystemChoice parse_system_choice(const std::string& name) {
  if (name == "nls2") return SystemChoice::nls2;
  if (name == "nls3") return SystemChoice::nls3;
  if (name == "single") return SystemChoice::single;
  if (name == "custom") return SystemChoice::custom;
  throw std::invalid_argument("unknown system '" + name + "' (expected nls2, nls3, single or custom)");
}

std::string to_string(SystemChoice choice) {
  switch (choice) {
    case SystemChoice::nls2: return "nls2";
    case SystemChoice::nls3: return "nls3";
    case SystemChoice::single: return "single";
    case SystemChoice::custom: return "custom";
  }
  return "?";
}

SystemSpec ExperimentConfig::build_spec() const {
  switch (system) {
    case SystemChoice::nls2: return build_nls2(Mass::parse(m), Mass::parse(mu), kappa, lambda);
    case SystemChoice::nls3: return build_nls3(Mass::parse(m), Mass::parse(mu), kappa, lambda);
    case SystemChoice::single: return build_single_cubic();
    case SystemChoice::custom:
      if (spec_file.empty()) throw std::invalid_argument("--system custom needs --spec-file");
      return load_system_spec(spec_file);
  }
  throw std::logic_error("unhandled system choice");
}

RunConfig ExperimentConfig::run_config() const {
  RunConfig rc;
  rc.dt = dt;
  rc.t_end = t_end;
  rc.boundary_mass_threshold = boundary_threshold;
  rc.epsilon_scale = eps > 0 ? eps : 1;
  rc.gamma = gamma;
  std::vector<double> times = log_snapshot_times(t_first, t_end, per_decade);
  for (double t : {10.0, 20.0})
    if (t > t_first && t < t_end) times.push_back(t);
  std::sort(times.begin(), times.end());
  std::vector<double> unique;
  for (double t : times)
    if (unique.empty() || t - unique.back() > 1e-9 * std::max(1.0, t)) unique.push_back(t);
  rc.snapshot_times = unique;
  return rc;
}

void ExperimentConfig::validate() const {
  if (!(L > 0)) throw std::invalid_argument("L must be positive");
  (void)grid();
  if (!(eps >= 0)) throw std::invalid_argument("eps must be nonnegative");
  if (!(t_first > 0 && t_first < t_end)) throw std::invalid_argument("first snapshot must lie in (0, t_end)");
  if (widths.empty() || amplitudes.empty()) throw std::invalid_argument("data widths and amplitudes must be given");
  for (double w : widths)
    if (!(w > 0)) throw std::invalid_argument("data widths must be positive");
  if (!(band > 0)) throw std::invalid_argument("band must be positive");
  if (!(fit_lo > 0 && fit_hi > fit_lo)) throw std::invalid_argument("fit window must satisfy 0 < lo < hi");
  if (!(delta >= 0 && delta < 0.25)) throw std::invalid_argument("delta must lie in [0, 1/4)");
  run_config().validate();
}

std::map<std::string, std::string> ExperimentConfig::entries() const {
  std::map<std::string, std::string> e;
  e["system"] = to_string(system);
  e["m"] = m;
  e["mu"] = mu;
  e["kappa"] = format_double(kappa.real()) + "," + format_double(kappa.imag());
  e["lambda"] = format_double(lambda.real()) + "," + format_double(lambda.imag());
  e["spec_file"] = spec_file;
  e["L"] = format_double(L);
  e["N"] = std::to_string(N);
  e["dt"] = format_double(dt);
  e["t_end"] = format_double(t_end);
  e["eps"] = format_double(eps);
  e["gamma"] = format_double(gamma);
  e["boundary_threshold"] = format_double(boundary_threshold);
  e["t_first"] = format_double(t_first);
  e["per_decade"] = std::to_string(per_decade);
  std::string w, a;
  for (double v : widths) w += format_double(v) + ",";
  for (double v : amplitudes) a += format_double(v) + ",";
  e["widths"] = w;
  e["amplitudes"] = a;
  e["band"] = format_double(band);
  e["fit_lo"] = format_double(fit_lo);
  e["fit_hi"] = format_double(fit_hi);
  e["delta"] = format_double(delta);
  return e;
}

SolutionState gaussian_data(const ExperimentConfig& cfg, int components) {
  const Grid g = cfg.grid();
  SolutionState s;
  for (int j = 0; j < components; ++j) {
    const double w = cfg.widths[std::min<std::size_t>(j, cfg.widths.size() - 1)];
    const double a = cfg.amplitudes[std::min<std::size_t>(j, cfg.amplitudes.size() - 1)];
    s.fields.push_back(std::complex<double>(cfg.eps * a) * gaussian_packet(g, w));
  }
  return s;
}

double data_norm(const SolutionState& state) {
  double total = 0;
  for (const Field& f : state.fields) {
    const FieldNorms<double> n = norms(f);
    total += n.h2 + n.weighted_h11;
  }
  return total;
}

std::vector<double> Simulation::times() const {
  std::vector<double> t;
  for (const auto& s : states) t.push_back(s.time);
  return t;
}

std::vector<ProfileData> Simulation::series(int component) const {
  std::vector<ProfileData> out;
  for (const auto& p : profiles) out.push_back(p.at(component));
  return out;
}

Simulation simulate(const ExperimentConfig& cfg, const std::optional<SolutionState>& initial,
                    const SnapshotSink& extra_sink) {
  cfg.validate();
  Simulation sim{cfg, cfg.build_spec(), 0, {}, {}, {}, 0};
  const SolutionState data = initial ? *initial : gaussian_data(cfg, sim.spec.components());
  sim.data_norm = data_norm(data);
  const auto start = Clock::now();
  const ProfileProbe probe = [&](const SolutionState& s) {
    sim.profiles.push_back(extract_profiles(s, sim.spec));
    return weighted_profile_sup(sim.profiles.back(), cfg.band);
  };
  const SnapshotSink sink = [&](const SolutionState& s) {
    sim.states.push_back(s);
    if (extra_sink) extra_sink(s);
  };
  RunResult r = run(data, sim.spec, cfg.run_config(), sink, probe);
  sim.diagnostics = std::move(r.diagnostics);
  sim.seconds = seconds_since(start);
  return sim;
}

Simulation load_simulation(const std::filesystem::path& dir, const ExperimentConfig& cfg) {
  const RunDirectory run_dir = open_run_directory(dir);
  Simulation sim{cfg, load_system_spec((dir / "system.spec").string()), 0, {}, {}, {}, 0};
  if (run_dir.files.empty()) throw std::runtime_error("'" + dir.string() + "' holds no snapshots");
  for (const auto& file : run_dir.files) {
    SolutionState s = read_snapshot(file);
    s.validate(sim.spec.components());
    sim.profiles.push_back(extract_profiles(s, sim.spec));
    sim.diagnostics.push_back(diagnostics(s, sim.spec, weighted_profile_sup(sim.profiles.back(), cfg.band), cfg.gamma));
    sim.states.push_back(std::move(s));
  }
  sim.config.t_end = sim.states.back().time;
  if (sim.states.front().time == 0) sim.data_norm = data_norm(sim.states.front());
  return sim;
}

Gate gate_le(std::string name, double value, double bound) {
  return {std::move(name), value, "<=", bound, bound, value <= bound};
}
Gate gate_ge(std::string name, double value, double bound) {
  return {std::move(name), value, ">=", bound, bound, value >= bound};
}
Gate gate_in(std::string name, double value, double lo, double hi) {
  return {std::move(name), value, "in", lo, hi, value >= lo && value <= hi};
}

bool Verdict::pass() const {
  return !gates.empty() && std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.pass; });
}

std::string format_gate(const Gate& g) {
  std::string s = g.name + " = " + fmt(g.value);
  if (g.relation == "in")
    s += " in [" + fmt(g.lo) + ", " + fmt(g.hi) + "]";
  else
    s += " " + g.relation + " " + fmt(g.lo);
  return s + (g.pass ? "" : "  <-- FAIL");
}

std::string Verdict::summary() const {
  std::ostringstream out;
  out << (pass() ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " (" << fmt(seconds, 3) << " s)";
  for (const Gate& g : gates) out << "\n    " << format_gate(g);
  for (const std::string& n : notes) out << "\n    note: " << n;
  return out.str();
}

// ---------------------------------------------------------------------------

Verdict operator_selftest() {
  const auto start = Clock::now();
  Verdict v{1, "operator identities", {}, {}, 0};
  const Grid g(1024, 40.0);

  double iso_F = 0, iso_U = 0, iso_M = 0, iso_W = 0;
  for (double mv : {-2.0, -1.0, 0.6, 1.0, 2.5}) {
    const Mass m(mv);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const Field f = random_packets(g, 10 * seed + 1);
      const double n = l2_norm(f);
      iso_F = std::max(iso_F, std::abs(l2_norm(scaled_fourier(f, m)) / n - 1));
      iso_U = std::max(iso_U, std::abs(l2_norm(free_evolve(f, m, 3.7)) / n - 1));
      iso_M = std::max(iso_M, std::abs(l2_norm(gauge_M(f, m, 1.3)) / n - 1));
      const Spectrum s = continuum_fourier(f);
      iso_W = std::max(iso_W, std::abs(l2_norm(lens_W(s, m, 2.0)) / l2_norm(s) - 1));
    }
  }
  v.gates.push_back(gate_le("F_m isometry residual", iso_F, 1e-10));
  v.gates.push_back(gate_le("U_m isometry residual", iso_U, 1e-10));
  v.gates.push_back(gate_le("M_m isometry residual", iso_M, 1e-10));
  v.gates.push_back(gate_le("W_m isometry residual", iso_W, 1e-10));

  {
    const Field phi = gaussian_packet(g, 1.0);
    const Mass m(1.0);
    const double t = 5;
    const Field factored = gauge_M(dilate_D(scaled_fourier(gauge_M(phi, m, t), m), t), m, t);
    v.gates.push_back(gate_le("factorization U = M D F M (Gaussian, m=1, t=5)", rel_l2(factored, free_evolve(phi, m, t)), 1e-8));
  }

  const Field f1 = random_packets(g, 31), f2 = random_packets(g, 32), f3 = random_packets(g, 33);
  const Mass one(1.0), three(3.0);
  v.gates.push_back(gate_le("Leibniz rule on the resonance manifold (1+1+1 = 3)",
                            leibniz_residual(f1, f2, f3, one, one, one, three, 2.0), 1e-10));
  v.gates.push_back(gate_le("Leibniz rule, mixed signs (2 - 0.5 + 1.5 = 3)",
                            leibniz_residual(f1, f2, f3, Mass(2.0), Mass(-0.5), Mass(1.5), three, 2.0), 1e-10));
  v.gates.push_back(
      gate_ge("Leibniz rule off the manifold (1+1+1 != 1)", leibniz_residual(f1, f2, f3, one, one, one, one, 2.0), 1e-3));
  v.gates.push_back(gate_le("three-factor divergence identity",
                            divergence_identity_residual(f1, f2, f3, Mass(-1.0), Mass(2.5), Mass(0.7), 3.0), 1e-10));
  v.gates.push_back(gate_le("two-component divergence identity (m=1, mu=4)",
                            nls2_divergence_residual(f1, f2, one, Mass(4.0), 2.0), 1e-10));

  double hilbert = 0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    Field f = random_band_limited(g, 50 + seed, g.size() / 2 + 1);
    f.values() -= f.values().mean();
    hilbert = std::max(hilbert, rel_l2(hilbert_transform(hilbert_transform(f)), -1.0 * f));
  }
  v.gates.push_back(gate_le("H^2 = -1 on mean-zero fields", hilbert, 1e-12));
  v.seconds = seconds_since(start);
  v.gates.push_back(gate_le("runtime [s]", v.seconds, 30));
  return v;
}

Verdict profile_approximation_rate() {
  const auto start = Clock::now();
  Verdict v{2, "free-flow pointwise profile approximation rate", {}, {}, 0};
  const Grid g(8192, 1600.0);
  const Mass m(1.0);
  const Field phi0 = gaussian_packet(g, 1.0);
  const Spectrum alpha = scaled_fourier(phi0, m);
  const std::vector<double> times = log_grid(10, 200, 16);
  std::vector<double> err;
  for (double t : times) err.push_back(profile_error_linf(free_evolve(phi0, m, t), t, m, alpha));
  const DecayFit fit = fit_decay(times, err, 10, 200);
  v.gates.push_back(gate_le("exponent of ||phi_t - M D F U^-1 phi_t||_inf on [10, 200]", fit.exponent, -0.70));
  v.notes.push_back("r^2 = " + fmt(fit.r_squared) + ", error at t=200: " + fmt(err.back()));
  v.seconds = seconds_since(start);
  v.gates.push_back(gate_le("runtime [s]", v.seconds, 60));
  return v;
}

Verdict dispersive_decay(const Simulation& run) {
  Verdict v{3, "dispersive decay of the default run", {}, {}, run.seconds};
  const double lo = run.config.fit_lo, hi = run.config.fit_hi;
  std::vector<double> t;
  for (const auto& d : run.diagnostics) t.push_back(d.time);
  double e_max = 0, tail_max = 0;
  for (const auto& d : run.diagnostics) {
    e_max = std::max(e_max, d.E_value);
    tail_max = std::max(tail_max, d.spectral_tail_fraction);
  }
  for (int j = 0; j < run.spec.components(); ++j) {
    std::vector<double> linf;
    for (const auto& d : run.diagnostics) linf.push_back(d.components[j].linf);
    const DecayFit fit = fit_decay(t, linf, lo, hi);
    v.gates.push_back(gate_in("component " + std::to_string(j + 1) + " L-inf exponent on [" + fmt(lo) + ", " + fmt(hi) + "]",
                              fit.exponent, -0.55, -0.45));
  }
  v.gates.push_back(gate_le("final boundary mass fraction", run.diagnostics.back().boundary_mass_fraction,
                            run.config.boundary_threshold));
  v.notes.push_back("sup_t E(t) = " + fmt(e_max) + ", data norm eps_norm = " + fmt(run.data_norm) + ", 3 eps_norm = " +
                    fmt(3 * run.data_norm));
  v.notes.push_back("max spectral tail fraction = " + fmt(tail_max));
  v.notes.push_back("run time " + fmt(run.seconds, 3) + " s (limit 600 s)");
  v.gates.push_back(gate_le("sup_t E(t) / (3 eps_norm)", e_max / (3 * run.data_norm), 1.0));
  v.gates.push_back(gate_le("max spectral tail fraction", tail_max, 1e-8));
  v.gates.push_back(gate_le("run time [s]", run.seconds, 600));
  return v;
}

std::vector<ScatteringReport> scattering_report(const Simulation& sim) {
  std::vector<ScatteringReport> out;
  const double T = sim.states.back().time;
  // the distance to the final profile flattens near T_end, so its rate is
  // read off well before it
  const double s_lo = std::min(sim.config.fit_lo, T / 16), s_hi = T / 4;
  for (int j = 0; j < sim.spec.components(); ++j) {
    ScatteringReport r{j, scattering_state(sim.series(j), s_lo, s_hi), {}, {}, {}};
    std::vector<double> pt;
    for (const auto& s : sim.states) {
      if (s.time < 1 || s.time >= T) continue;
      pt.push_back(s.time);
      r.profile_error.push_back(profile_error_linf(s.fields[j], s.time, sim.spec.mass(j), r.estimate.alpha_plus));
    }
    r.l2_fit = fit_decay(r.estimate.times, r.estimate.l2_error, s_lo, s_hi);
    r.profile_error_fit = fit_decay(pt, r.profile_error, sim.config.fit_lo, sim.config.fit_hi);
    out.push_back(std::move(r));
  }
  return out;
}

Verdict scattering_rates(const Simulation& run) {
  Verdict v{4, "scattering rates of the default run", {}, {}, 0};
  const auto start = Clock::now();
  for (const ScatteringReport& r : scattering_report(run)) {
    const std::string c = "component " + std::to_string(r.component + 1);
    v.gates.push_back(gate_le(c + " ||alpha(t) - alpha(T)||_L2 exponent on [" + fmt(r.l2_fit.t_lo) + ", " +
                                  fmt(r.l2_fit.t_hi) + "]",
                              r.l2_fit.exponent, -0.25 + run.config.delta));
    v.gates.push_back(gate_ge(c + " r^2 of that fit", r.l2_fit.r_squared, 0.9));
    v.gates.push_back(gate_le(c + " profile error L-inf exponent on [" + fmt(r.profile_error_fit.t_lo) + ", " +
                                  fmt(r.profile_error_fit.t_hi) + "]",
                              r.profile_error_fit.exponent, -0.75 + 0.15));
    v.gates.push_back(gate_ge(c + " r^2 of that fit", r.profile_error_fit.r_squared, 0.9));
    v.notes.push_back(c + ": combined L2+Linf convergence exponent " + fmt(r.estimate.convergence.exponent) +
                      " (r^2 " + fmt(r.estimate.convergence.r_squared) + ")");
  }
  v.seconds = seconds_since(start);
  return v;
}

Verdict profile_boundedness(const Simulation& nls3_run, const Simulation& nls2_run) {
  Verdict v{5, "uniform profile bound", {}, {}, 0};
  for (const Simulation* sim : {&nls3_run, &nls2_run}) {
    std::vector<double> t, p;
    for (const auto& d : sim->diagnostics)
      if (d.time >= 1) {
        t.push_back(d.time);
        p.push_back(d.profile_linf);
      }
    const DecayFit fit = fit_decay(t, p, 1, sim->config.t_end);
    const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
    v.gates.push_back(gate_le(to_string(sim->config.system) + " (m=" + sim->config.m + ", mu=" + sim->config.mu +
                                  ") |log-log slope| of sup <xi>(|alpha|+|beta|)",
                              std::abs(fit.exponent), 0.03));
    v.notes.push_back(to_string(sim->config.system) + ": profile sup ranges over [" + fmt(*lo, 6) + ", " + fmt(*hi, 6) + "]");
    v.seconds += sim->seconds;
  }
  return v;
}

Verdict reduced_model_fidelity(const Simulation& run, double t_start) {
  const auto start = Clock::now();
  Verdict v{6, "reduced profile equation against the full solver", {}, {}, 0};
  const std::size_t k0 = nearest_snapshot(run, t_start);
  const double t0 = run.states[k0].time, T = run.states.back().time;
  ReducedModel model = build_reduced_model(run.spec, 100);
  model.window = run.config.band;
  const ResonanceReport report = classify(run.spec);
  for (std::size_t i = 0; i < report.terms.size(); ++i) {
    const TermResonance& res = report.terms[i];
    if (res.resonant_self) continue;
    const StationaryPhaseResult sp =
        stationary_phase_constant(run.spec.mass(run.spec.terms()[i].target), res.mass_sum, 100);
    v.gates.push_back(gate_le("term " + std::to_string(i + 1) + " stationary-phase constant change under t doubling",
                              sp.relative_change, 1e-3));
    v.notes.push_back("term " + std::to_string(i + 1) + ": constant " + fmt(sp.constant.real(), 8) + " + " +
                      fmt(sp.constant.imag(), 8) + "i, omega " + fmt(res.omega.value_or(0), 8));
  }
  ProfileSet alpha;
  for (const auto& p : run.profiles[k0]) alpha.push_back(p.values);
  const ProfileSet reduced = reduced_integrate(model, alpha, t0, T, 0.05);
  for (int j = 0; j < run.spec.components(); ++j) {
    const Spectrum& full = run.profiles.back()[j].values;
    v.gates.push_back(gate_le("component " + std::to_string(j + 1) + " relative L-inf mismatch on |xi| <= 2 at t = " + fmt(T),
                              band_relative_linf(reduced[j], full, 2), 0.05));
    v.notes.push_back("component " + std::to_string(j + 1) + ": frozen profile from t = " + fmt(t0) +
                      " would miss by " + fmt(band_relative_linf(alpha[j], full, 2)));
  }
  v.seconds = seconds_since(start);
  return v;
}

Verdict resonant_divergence(const Simulation& resonant, const Simulation& control) {
  Verdict v{7, "resonant divergence of ||v||_L2", {}, {}, resonant.seconds + control.seconds};
  auto series = [](const Simulation& s) {
    std::pair<std::vector<double>, std::vector<double>> out;
    for (const auto& d : s.diagnostics) {
      out.first.push_back(d.time);
      out.second.push_back(d.components.at(1).l2);
    }
    return out;
  };
  const auto [tr, vr] = series(resonant);
  const auto [tc, vc] = series(control);
  const GrowthVerdict gr = blowup_monitor(tr, vr, 10, 0.25);
  const GrowthVerdict gc = blowup_monitor(tc, vc, 10, 0.25);
  v.gates.push_back(gate_ge("resonant (mu=" + resonant.config.mu + ") growth of ||v|| from t=10 to t=" +
                                fmt(resonant.config.t_end),
                            gr.relative_growth, 0.25));
  v.gates.push_back(gate_ge("resonant increments positive over the second half (1 = yes)", gr.eventually_increasing, 1));
  v.gates.push_back(gate_le("control (mu=" + control.config.mu + ") relative variation of ||v|| after t=10",
                            gc.relative_variation, 0.02));
  v.gates.push_back(gate_le("combined run time [s]", v.seconds, 900));
  v.notes.push_back("resonant ||v||: " + fmt(vr.front()) + " at t=0, " + fmt(vr.back()) + " at t_end");
  return v;
}

Verdict conserved_combination(const Simulation& run, const Simulation& half_eps_run) {
  Verdict v{8, "approximate conservation in the doubly resonant two-component system", {}, {},
            run.seconds + half_eps_run.seconds};
  auto monitor = [](const Simulation& s) {
    const double hi = s.config.t_end;
    return resonant_conserved_monitor(window(s.series(0), 1, hi), window(s.series(1), 1, hi), s.spec.mass(0),
                                      s.spec.mass(1), s.config.kappa, s.config.lambda, 2);
  };
  const ConservationSeries a = monitor(run), b = monitor(half_eps_run);
  v.gates.push_back(gate_le("max drift of c|alpha|^2 + |beta|^2 on |xi|<=2, eps=" + fmt(run.config.eps), a.max_drift, 0.10));
  v.gates.push_back(gate_le("drift at eps=" + fmt(half_eps_run.config.eps) + " relative to eps=" + fmt(run.config.eps),
                            b.max_drift / a.max_drift, 1 - 1e-9));
  v.notes.push_back("c = " + fmt(a.c) + "; drift at half eps " + fmt(b.max_drift));
  v.notes.push_back("mass-balanced weight (c m/mu) drift: " + fmt(a.max_balanced_drift) + " / " +
                    fmt(b.max_balanced_drift));
  return v;
}

Verdict modified_scattering(const Simulation& run, const Simulation& double_eps_run) {
  Verdict v{9, "logarithmic phase drift of the single cubic equation", {}, {}, run.seconds + double_eps_run.seconds};
  const double lo = run.config.fit_lo, hi = run.config.t_end;
  const PhaseDriftFit a = modified_scattering_check(run.series(0), 0, lo, hi);
  const PhaseDriftFit b = modified_scattering_check(double_eps_run.series(0), 0, lo, hi);
  v.gates.push_back(gate_le("|slope / (-|alpha(T,0)|^2) - 1|, eps=" + fmt(run.config.eps),
                            std::abs(a.slope / a.predicted_slope - 1), 0.15));
  double modulus = 0;
  for (const Simulation* s : {&run, &double_eps_run})
    for (double xi : {0.0, 0.5, 1.0})
      modulus = std::max(modulus, modified_scattering_check(s->series(0), xi, lo, hi).modulus_variation);
  v.gates.push_back(gate_le("max relative variation of |alpha(t, xi)|, xi in {0, 0.5, 1}", modulus, 0.05));
  v.gates.push_back(gate_in("slope ratio under eps doubling", b.slope / a.slope, 3.2, 4.8));
  v.notes.push_back("slope " + fmt(a.slope) + " vs predicted " + fmt(a.predicted_slope) + "; doubled eps slope " +
                    fmt(b.slope) + " vs " + fmt(b.predicted_slope));
  return v;
}

Verdict solver_selftest() {
  const auto start = Clock::now();
  Verdict v{10, "solver correctness", {}, {}, 0};
  {
    const Grid g(512, 40.0);
    const Mass m(Rational(3, 2));
    const SystemSpec linear(std::vector<Mass>{m}, {});
    const Field u0 = random_packets(g, 5);
    LawsonIntegrator integ(linear, SolutionState{0, {u0}});
    for (int i = 0; i < 10000; ++i) integ.step(1e-3);
    v.gates.push_back(gate_le("free flow, 10^4 steps: ||u - U(t) u0||_L2", l2_norm(integ.state().fields[0] -
                                                                                  free_evolve(u0, m, 10.0)),
                              1e-12));
  }
  {
    const Grid g(256, 30.0);
    const std::vector<std::pair<SystemSpec, double>> systems = {
        {build_nls3(Mass(1.0), Mass(2.0), 1.0, 1.0), 0.1},
        {build_nls2(Mass(1.0), Mass(4.0), 1.0, 1.0), 0.5},
        {build_single_cubic(), 0.5},
    };
    for (const auto& [spec, amp] : systems) {
      SolutionState s0;
      for (int j = 0; j < spec.components(); ++j) s0.fields.push_back(std::complex<double>(amp) * random_packets(g, 60 + j));
      auto solve = [&](double dt) {
        LawsonIntegrator integ(spec, s0);
        const long n = std::lround(1.0 / dt);
        for (long i = 0; i < n; ++i) integ.step(dt);
        return integ.state();
      };
      auto diff = [](const SolutionState& a, const SolutionState& b) {
        double d = 0;
        for (std::size_t j = 0; j < a.fields.size(); ++j) d += std::pow(l2_norm(a.fields[j] - b.fields[j]), 2);
        return std::sqrt(d);
      };
      const SolutionState a = solve(0.05), b = solve(0.025), c = solve(0.0125);
      const double ratio = diff(a, b) / diff(b, c);
      v.gates.push_back(gate_in(to_string(spec.kind()) + " self-convergence ratio under dt halving", ratio, 16 * 0.8, 16 * 1.2));
    }
  }
  {
    const Grid g(256, 15.0);
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const std::array<Field, 3> f{random_band_limited(g, 3 * seed, 128), random_band_limited(g, 3 * seed + 1, 128),
                                   random_band_limited(g, 3 * seed + 2, 128)};
      const std::array<int, 3> orders{static_cast<int>(seed % 2), 0, static_cast<int>((seed / 2) % 2)};
      worst = std::max(worst, rel_l2(dealias_pad_multiply(f[0], f[1], f[2], orders), fine_grid_product(f, orders)));
    }
    v.gates.push_back(gate_le("dealiased product against a four-fold fine grid", worst, 1e-12));
  }
  v.seconds = seconds_since(start);
  return v;
}

// ---------------------------------------------------------------------------

namespace presets {

ExperimentConfig default_nls3() { return ExperimentConfig{}; }

ExperimentConfig nls2_bounded() {
  ExperimentConfig c;
  c.system = SystemChoice::nls2;
  c.m = "1";
  c.mu = "4";
  return c;
}

ExperimentConfig blowup(bool resonant) {
  ExperimentConfig c;
  c.m = "1";
  c.mu = resonant ? "3" : "5/2";
  c.kappa = 0;
  c.lambda = 1;
  c.eps = 0.1;
  c.t_end = 400;
  // narrow u: alpha spreads to |xi| ~ 2 where the non-resonant phase settles
  // by t ~ 30; the small v keeps the control's early transient under 1%
  c.L = 3200;
  c.N = 16384;
  c.dt = 0.02;
  c.widths = {0.6, 1};
  c.amplitudes = {1, 0.02};
  c.per_decade = 16;
  return c;
}

ExperimentConfig conserved(double eps) {
  ExperimentConfig c;
  c.system = SystemChoice::nls2;
  c.m = "1";
  c.mu = "3";
  c.kappa = 1;
  c.lambda = -1;
  c.eps = eps;
  c.t_end = 100;
  c.band = 2;
  c.per_decade = 16;
  return c;
}

ExperimentConfig single_cubic(double eps) {
  ExperimentConfig c;
  c.system = SystemChoice::single;
  c.eps = eps;
  c.widths = {1};
  c.amplitudes = {1};
  c.L = 800;
  c.N = 8192;
  c.t_end = 200;
  c.fit_lo = 10;
  return c;
}

}  // namespace presets

// ---------------------------------------------------------------------------

void write_diagnostics_csv(const std::filesystem::path& path, const Simulation& sim) {
  std::vector<std::string> cols{"time"};
  for (int j = 1; j <= sim.spec.components(); ++j)
    for (const char* q : {"l2", "linf", "h2", "J_h1", "P_l2"}) cols.push_back(std::string(q) + "_" + std::to_string(j));
  for (const char* q : {"profile_linf", "E_value", "boundary_mass_fraction", "spectral_tail_fraction"}) cols.push_back(q);
  CsvWriter w(path, cols, sim.config.hash());
  for (const auto& d : sim.diagnostics) {
    std::vector<CsvWriter::Cell> row{d.time};
    for (const auto& c : d.components)
      for (double q : {c.l2, c.linf, c.h2, c.J_h1, c.P_l2}) row.push_back(q);
    for (double q : {d.profile_linf, d.E_value, d.boundary_mass_fraction, d.spectral_tail_fraction}) row.push_back(q);
    w.row(row);
  }
}

void write_verdict_csv(const std::filesystem::path& path, const std::vector<Verdict>& verdicts, const std::string& hash) {
  CsvWriter w(path, {"criterion", "title", "gate", "value", "relation", "lo", "hi", "pass"}, hash);
  for (const Verdict& v : verdicts)
    for (const Gate& g : v.gates)
      w.row({static_cast<long long>(v.id), v.title, g.name, g.value, g.relation, g.lo, g.hi,
             static_cast<long long>(g.pass)});
}

void write_scattering_csv(const std::filesystem::path& dir, const Simulation& sim,
                          const std::vector<ScatteringReport>& reports) {
  const std::string hash = sim.config.hash();
  {
    CsvWriter w(dir / "scattering.csv", {"component", "time", "l2_error", "linf_error", "profile_error_linf"}, hash);
    for (const auto& r : reports)
      for (std::size_t i = 0; i < r.estimate.times.size(); ++i)
        w.row({static_cast<long long>(r.component + 1), r.estimate.times[i], r.estimate.l2_error[i],
               r.estimate.linf_error[i], i < r.profile_error.size() ? r.profile_error[i] : 0.0});
  }
  {
    CsvWriter w(dir / "fits.csv", {"component", "quantity", "exponent", "intercept", "r_squared", "t_lo", "t_hi", "samples"},
                hash);
    for (const auto& r : reports) {
      const std::pair<const char*, const DecayFit*> fits[] = {
          {"alpha_l2_error", &r.l2_fit}, {"alpha_l2_plus_linf_error", &r.estimate.convergence},
          {"profile_error_linf", &r.profile_error_fit}};
      for (const auto& [name, f] : fits)
        w.row({static_cast<long long>(r.component + 1), std::string(name), f->exponent, f->intercept, f->r_squared,
               f->t_lo, f->t_hi, static_cast<long long>(f->samples)});
    }
  }
  {
    std::vector<std::string> cols{"xi"};
    for (const auto& r : reports) {
      cols.push_back("re_alpha_plus_" + std::to_string(r.component + 1));
      cols.push_back("im_alpha_plus_" + std::to_string(r.component + 1));
    }
    CsvWriter w(dir / "alpha_plus.csv", cols, hash);
    const Grid& g = reports.at(0).estimate.alpha_plus.grid();
    for (Index i = 0; i < g.size(); ++i) {
      std::vector<CsvWriter::Cell> row{g.frequency(i)};
      for (const auto& r : reports) {
        row.push_back(r.estimate.alpha_plus[i].real());
        row.push_back(r.estimate.alpha_plus[i].imag());
      }
      w.row(row);
    }
  }
}

}  // namespace dnls
