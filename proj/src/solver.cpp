#include "dnls/solver.hpp"

#include <algorithm>
#include <cmath>

namespace dnls {

void RunConfig::validate() const {
  if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(t_end > 0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be positive");
  if (dt > t_end) throw std::invalid_argument("dt must not exceed t_end");
  if (!(boundary_mass_threshold > 0 && boundary_mass_threshold < 1))
    throw std::invalid_argument("boundary mass threshold must lie in (0, 1)");
  if (!(epsilon_scale > 0)) throw std::invalid_argument("epsilon scale must be positive");
  if (!(gamma > 0 && gamma < 0.25)) throw std::invalid_argument("gamma must lie in (0, 1/4)");
  if (boundary_check_interval < 1) throw std::invalid_argument("boundary check interval must be >= 1");
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    const double t = snapshot_times[i];
    if (!(t >= 0 && t <= t_end)) throw std::invalid_argument("snapshot times must lie in [0, t_end]");
    if (i > 0 && !(t > snapshot_times[i - 1])) throw std::invalid_argument("snapshot times must be strictly increasing");
  }
}

std::vector<double> log_snapshot_times(double t_first, double t_end, int per_decade) {
  if (!(t_first > 0 && t_end > t_first) || per_decade < 1) throw std::invalid_argument("bad snapshot schedule");
  std::vector<double> out{0.0};
  const double decades = std::log10(t_end / t_first);
  const int count = static_cast<int>(std::floor(decades * per_decade + 1e-9));
  for (int i = 0; i <= count; ++i) out.push_back(t_first * std::pow(10.0, static_cast<double>(i) / per_decade));
  if (out.back() < t_end * (1 - 1e-12)) out.push_back(t_end);
  out.back() = std::min(out.back(), t_end);
  return out;
}

double boundary_mass_fraction(const std::vector<Field>& fields) {
  double outer = 0, total = 0;
  for (const Field& f : fields) {
    const Grid& g = f.grid();
    const double edge = 0.9 * g.half_length();
    for (Index n = 0; n < g.size(); ++n) {
      const double a = std::norm(f[n]);
      total += a;
      if (std::abs(g.position(n)) >= edge) outer += a;
    }
  }
  return total > 0 ? outer / total : 0.0;
}

double spectral_tail_fraction(const std::vector<Field>& fields) {
  double tail = 0, total = 0;
  for (const Field& f : fields) {
    const Grid& g = f.grid();
    const ComplexArray<double> c = detail::series_coefficients(f);
    const Index cutoff = (g.size() / 2) * 5 / 6;
    for (Index k = 0; k < g.size(); ++k) {
      const double a = std::norm(c[k]);
      total += a;
      if (std::abs(g.wavenumber(k)) > cutoff) tail += a;
    }
  }
  return total > 0 ? tail / total : 0.0;
}

DiagnosticsRecord diagnostics(const SolutionState& state, const SystemSpec& spec, double profile_linf, double gamma) {
  if (!(gamma > 0 && gamma < 0.25)) throw std::invalid_argument("gamma must lie in (0, 1/4)");
  state.validate(spec.components());
  DiagnosticsRecord rec;
  rec.time = state.time;
  rec.profile_linf = profile_linf;
  const std::vector<Field> F = evaluate_nonlinearity(spec, state);
  double weighted = 0;
  for (int j = 0; j < spec.components(); ++j) {
    const Field& u = state.fields[j];
    const Mass& m = spec.mass(j);
    ComponentDiagnostics c;
    c.l2 = l2_norm(u);
    c.linf = linf_norm(u);
    c.h2 = sobolev_norm(u, 2);
    c.J_h1 = sobolev_norm(apply_J(u, m, state.time), 1);
    c.P_l2 = l2_norm(apply_P(u, m, state.time, F[j]));
    weighted += c.h2 + c.J_h1;
    rec.components.push_back(c);
  }
  rec.E_value = profile_linf + std::pow(1 + state.time, -gamma / 3) * weighted;
  rec.boundary_mass_fraction = boundary_mass_fraction(state.fields);
  rec.spectral_tail_fraction = spectral_tail_fraction(state.fields);
  return rec;
}

LawsonIntegrator::LawsonIntegrator(const SystemSpec& spec, const SolutionState& initial)
    : spec_(spec), grid_(initial.grid()), eval_(spec, initial.grid()), time_(initial.time) {
  initial.validate(spec.components());
  for (const Field& f : initial.fields) coeffs_.push_back(detail::series_coefficients(f));
}

const LawsonIntegrator::Propagators& LawsonIntegrator::propagators(double dt) {
  for (const auto& p : cache_)
    if (p.dt == dt) return p;
  if (cache_.size() >= 4) cache_.erase(cache_.begin() + 1);  // keep the regular step, drop landing steps
  Propagators p;
  p.dt = dt;
  const Index n = grid_.size();
  for (int j = 0; j < spec_.components(); ++j) {
    const long double rate = 1.0L / (2.0L * spec_.mass(j).value());
    ComplexArray<double> half(n), full(n);
    for (Index k = 0; k < n; ++k) {
      const long double xi = static_cast<long double>(grid_.wavenumber(k)) * grid_.frequency_spacing();
      half[k] = detail::unit_phase<double>(-rate * xi * xi * dt / 2);
      full[k] = detail::unit_phase<double>(-rate * xi * xi * dt);
    }
    p.half.push_back(std::move(half));
    p.full.push_back(std::move(full));
  }
  cache_.push_back(std::move(p));
  return cache_.back();
}

void LawsonIntegrator::rhs(const std::vector<ComplexArray<double>>& c, std::vector<ComplexArray<double>>& out) {
  eval_.evaluate_series(c, out);
  for (auto& o : out) o *= std::complex<double>(0, -1);
}

void LawsonIntegrator::step(double dt, std::optional<double> new_time) {
  if (!(dt > 0)) throw std::invalid_argument("step size must be positive");
  const Propagators& p = propagators(dt);
  const int nc = spec_.components();
  const bool linear = spec_.terms().empty();
  if (linear) {
    for (int j = 0; j < nc; ++j) coeffs_[j] *= p.full[j];
  } else {
    rhs(coeffs_, k1_);
    tmp_.resize(nc);
    base_.resize(nc);
    for (int j = 0; j < nc; ++j) {
      base_[j] = p.half[j] * coeffs_[j];  // E(h/2) c
      tmp_[j] = base_[j] + (dt / 2) * p.half[j] * k1_[j];
    }
    rhs(tmp_, k2_);
    for (int j = 0; j < nc; ++j) tmp_[j] = base_[j] + (dt / 2) * k2_[j];
    rhs(tmp_, k3_);
    for (int j = 0; j < nc; ++j) tmp_[j] = p.full[j] * coeffs_[j] + dt * p.half[j] * k3_[j];
    rhs(tmp_, k4_);
    for (int j = 0; j < nc; ++j)
      coeffs_[j] = p.full[j] * (coeffs_[j] + (dt / 6) * k1_[j]) + (dt / 3) * p.half[j] * (k2_[j] + k3_[j]) +
                   (dt / 6) * k4_[j];
  }
  time_ = new_time ? *new_time : time_ + dt;
}

SolutionState LawsonIntegrator::state() const {
  SolutionState s;
  s.time = time_;
  for (const auto& c : coeffs_) s.fields.push_back(detail::field_from_series(grid_, c));
  return s;
}

bool LawsonIntegrator::finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](const ComplexArray<double>& c) { return c.isFinite().all(); });
}

SolutionState step(const SolutionState& state, const SystemSpec& spec, double dt) {
  LawsonIntegrator integ(spec, state);
  integ.step(dt);
  if (!integ.finite()) throw SolverAbort(SolverAbort::Reason::blowup, state, "numerical blow-up or instability");
  return integ.state();
}

RunResult run(const SolutionState& initial, const SystemSpec& spec, const RunConfig& cfg, const SnapshotSink& sink,
              const ProfileProbe& profile) {
  cfg.validate();
  initial.validate(spec.components());
  if (initial.time != 0) throw std::invalid_argument("run must start at t = 0");
  LawsonIntegrator integ(spec, initial);
  RunResult result;
  auto record = [&](const SolutionState& s) {
    const double prof = profile ? profile(s) : 0.0;
    result.diagnostics.push_back(diagnostics(s, spec, prof, cfg.gamma));
    if (sink) sink(s);
  };

  std::vector<double> targets = cfg.snapshot_times;
  const bool end_is_snapshot = !targets.empty() && targets.back() == cfg.t_end;
  if (!end_is_snapshot) targets.push_back(cfg.t_end);

  SolutionState last_good = initial;
  long steps = 0;
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    const double target = targets[ti];
    const bool emit = ti + 1 < targets.size() || end_is_snapshot;
    while (integ.time() < target) {
      const double remaining = target - integ.time();
      const bool landing = remaining <= cfg.dt * (1 + 1e-9);
      integ.step(landing ? remaining : cfg.dt, landing ? std::optional<double>(target) : std::nullopt);
      ++steps;
      if (!integ.finite())
        throw SolverAbort(SolverAbort::Reason::blowup, last_good,
                          "numerical blow-up or instability at t = " + std::to_string(integ.time()));
      if (steps % cfg.boundary_check_interval == 0 || landing) {
        SolutionState now = integ.state();
        const double frac = boundary_mass_fraction(now.fields);
        if (frac > cfg.boundary_mass_threshold)
          throw SolverAbort(SolverAbort::Reason::boundary, last_good,
                            "boundary mass fraction " + std::to_string(frac) + " exceeds threshold at t = " +
                                std::to_string(now.time) + "; the periodic box no longer approximates the line");
        last_good = std::move(now);
      }
    }
    if (emit) record(ti == 0 && target == 0 ? initial : integ.state());
  }
  result.final_state = integ.state();
  return result;
}

}  // namespace dnls
