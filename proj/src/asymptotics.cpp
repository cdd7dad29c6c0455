#include "dnls/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace dnls {

ProfileData extract_profile(const SolutionState& state, const Mass& m, int component) {
  const Field& u = state.fields.at(component);
  return {state.time, component, scaled_fourier(free_evolve(u, m, -state.time), m)};
}

std::vector<ProfileData> extract_profiles(const SolutionState& state, const SystemSpec& spec) {
  state.validate(spec.components());
  std::vector<ProfileData> out;
  for (int j = 0; j < spec.components(); ++j) out.push_back(extract_profile(state, spec.mass(j), j));
  return out;
}

double weighted_profile_sup(const std::vector<ProfileData>& profiles, double band) {
  if (profiles.empty()) return 0;
  const Grid& g = profiles[0].values.grid();
  double best = 0;
  for (Index i = 0; i < g.size(); ++i) {
    const double xi = g.frequency(i);
    if (std::abs(xi) > band) continue;
    double sum = 0;
    for (const auto& p : profiles) sum += std::abs(p.values[i]);
    best = std::max(best, std::sqrt(1 + xi * xi) * sum);
  }
  return best;
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value, double t_lo, double t_hi) {
  if (t.size() != value.size()) throw std::invalid_argument("fit_decay: time and value series differ in length");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(t[i] > 0)) throw std::invalid_argument("fit_decay: times must be positive");
    if (!(value[i] > 0) || !std::isfinite(value[i]))
      throw std::domain_error("fit_decay: nonpositive value " + std::to_string(value[i]) + " at t = " + std::to_string(t[i]));
    x.push_back(std::log(t[i]));
    y.push_back(std::log(value[i]));
  }
  if (static_cast<int>(x.size()) < min_fit_samples)
    throw std::invalid_argument("fit_decay: window [" + std::to_string(t_lo) + ", " + std::to_string(t_hi) + "] holds " +
                                std::to_string(x.size()) + " samples, at least " + std::to_string(min_fit_samples) +
                                " required");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  DecayFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.exponent * x[i]);
    ss_res += r * r;
  }
  // a flat series is fitted perfectly
  fit.r_squared = syy > 0 ? std::clamp(1 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.samples = static_cast<int>(x.size());
  return fit;
}

namespace {

Index next_pow2(double n) {
  Index p = 16;
  while (static_cast<double>(p) < n) p <<= 1;
  return p;
}

std::complex<double> chain_constant(double m, double mass_sum, double t) {
  constexpr double reach = 8;  // e^{-reach^2/2} is below round-off
  const double a = mass_sum - m;
  const double band = 1.25 * reach * std::max(1.0, std::abs(mass_sum / m));
  const double half_length = 1.25 * (std::abs(a) * t * reach + reach);
  const Index n = next_pow2(2 * half_length * band / std::numbers::pi);
  // half-length chosen so the band limit is exactly `band`; it is >= half_length
  const Grid g(n, static_cast<double>(n) * std::numbers::pi / (2 * band));
  // psi(xi) = E^{a}(t) f, f = e^{-xi^2/2}
  const long double rate = 0.5L * a * t;
  Spectrum psi(g);
  for (Index i = 0; i < n; ++i) {
    const long double xi = g.frequency(i);
    psi[i] = std::exp(-0.5 * static_cast<double>(xi * xi)) * detail::unit_phase<double>(rate * xi * xi);
  }
  const Spectrum out = lens_W(psi, Mass(m), t, true);
  return out[n / 2] / std::sqrt(std::abs(m / mass_sum));
}

}  // namespace

StationaryPhaseResult stationary_phase_constant(const Mass& m, double mass_sum, double t_probe,
                                                double stability_tolerance) {
  if (mass_sum == 0) throw std::domain_error("stationary phase constant undefined for zero mass sum");
  if (mass_sum == m.value()) throw std::domain_error("stationary phase constant: resonant case S = m has no oscillation");
  if (!(t_probe >= 1)) throw std::invalid_argument("stationary phase constant needs t_probe >= 1");
  StationaryPhaseResult r;
  r.constant = chain_constant(m.value(), mass_sum, t_probe);
  const std::complex<double> doubled = chain_constant(m.value(), mass_sum, 2 * t_probe);
  r.relative_change = std::abs(doubled - r.constant) / std::abs(r.constant);
  if (r.relative_change > stability_tolerance)
    throw std::runtime_error("stationary phase constant not converged: relative change " +
                             std::to_string(r.relative_change) + " between t = " + std::to_string(t_probe) + " and " +
                             std::to_string(2 * t_probe));
  r.constant = doubled;
  return r;
}

std::complex<double> stationary_phase_quadrature(double m, double mass_sum, double t) {
  // sqrt(|m| t / 2pi) e^{-i pi/4 sgn m} int e^{i t S z^2 / 2} f(z) dz, divided by sqrt|m/S|
  constexpr double reach = 8.5;
  const double dz = std::numbers::pi / (4 * std::abs(mass_sum) * t * reach);
  const long n = static_cast<long>(std::ceil(reach / dz));
  std::complex<double> acc = 0;
  for (long k = -n; k <= n; ++k) {
    const long double z = static_cast<long double>(k) * dz;
    acc += std::exp(-0.5 * static_cast<double>(z * z)) * detail::unit_phase<double>(0.5L * t * mass_sum * z * z);
  }
  acc *= dz;
  const std::complex<double> pre =
      std::sqrt(std::abs(m) * t / (2 * std::numbers::pi)) * std::polar(1.0, -std::numbers::pi / 4 * (m > 0 ? 1 : -1));
  return pre * acc / std::sqrt(std::abs(m / mass_sum));
}

ReducedModel build_reduced_model(const SystemSpec& spec, double t_probe) {
  const ResonanceReport report = classify(spec);
  ReducedModel model;
  model.components = spec.components();
  std::map<std::pair<double, double>, std::complex<double>> gamma_cache;
  for (std::size_t i = 0; i < spec.terms().size(); ++i) {
    const CubicTerm& term = spec.terms()[i];
    const TermResonance& res = report.terms[i];
    if (res.resonant_zero) throw std::domain_error("term " + std::to_string(i + 1) + " has zero mass sum; no reduced form");
    ReducedTerm rt;
    rt.target = term.target;
    rt.factors = term.factors;
    rt.coeff = term.coeff;
    for (int k = 0; k < 3; ++k) rt.signed_masses[k] = spec.signed_mass(term.factors[k].slot).value();
    const double mj = spec.mass(term.target).value();
    if (res.resonant_self) {
      rt.ratio = 1;
      rt.omega = 0;
      rt.gamma = 1;
    } else {
      rt.ratio = mj / res.mass_sum;
      rt.omega = *res.omega;
      const auto key = std::make_pair(mj, res.mass_sum);
      auto it = gamma_cache.find(key);
      if (it == gamma_cache.end())
        it = gamma_cache.emplace(key, stationary_phase_constant(spec.mass(term.target), res.mass_sum, t_probe).constant).first;
      rt.gamma = it->second;
    }
    model.terms.push_back(rt);
  }
  return model;
}

void reduced_rhs(const ReducedModel& model, const ProfileSet& alpha, double t, ProfileSet& out) {
  if (static_cast<int>(alpha.size()) != model.components) throw std::invalid_argument("reduced model: profile count mismatch");
  const Grid& g = alpha[0].grid();
  const Index n = g.size();
  out.assign(model.components, Spectrum(g));
  // band-limited interpolants of each profile, and their samples at r xi
  std::vector<std::optional<Field>> interpolant(model.components);
  std::map<std::pair<int, double>, ComplexArray<double>> sampled;
  auto samples = [&](int comp, double r) -> const ComplexArray<double>& {
    const auto key = std::make_pair(comp, r);
    auto it = sampled.find(key);
    if (it != sampled.end()) return it->second;
    if (r == 1) return sampled.emplace(key, alpha[comp].values()).first->second;
    if (!interpolant[comp]) interpolant[comp] = inverse_fourier(alpha[comp]);
    return sampled.emplace(key, fourier_at_uniform(*interpolant[comp], r * g.frequency(0), r * g.frequency_spacing(), n))
        .first->second;
  };
  const RealArray<double> xi = g.frequencies();
  for (const ReducedTerm& term : model.terms) {
    ComplexArray<double> G = ComplexArray<double>::Constant(n, term.coeff);
    for (int k = 0; k < 3; ++k) {
      const FactorRef& f = term.factors[k];
      const int comp = f.slot % model.components;
      const bool conj = f.slot >= model.components;
      const ComplexArray<double>& s = samples(comp, term.ratio);
      G *= conj ? ComplexArray<double>(s.conjugate()) : s;
      if (f.derivative == 1) G *= std::complex<double>(0, term.signed_masses[k] * term.ratio) * xi;
    }
    const std::complex<double> pre = std::complex<double>(0, -1) * term.gamma * std::sqrt(std::abs(term.ratio)) / t;
    auto& o = out[term.target].values();
    for (Index i = 0; i < n; ++i) {
      if (std::abs(xi[i]) > model.window) continue;
      const long double x = xi[i];
      o[i] += pre * detail::unit_phase<double>(static_cast<long double>(term.omega) * t * x * x) * G[i];
    }
  }
}

ProfileSet reduced_step(const ReducedModel& model, const ProfileSet& alpha, double t, double dt) {
  if (!(t >= 1)) throw std::invalid_argument("reduced model is a large-time approximation; needs t >= 1");
  if (!(dt > 0)) throw std::invalid_argument("reduced step needs dt > 0");
  ProfileSet k1, k2, k3, k4, tmp = alpha;
  auto axpy = [&](const ProfileSet& k, double h) {
    for (std::size_t j = 0; j < alpha.size(); ++j) tmp[j] = alpha[j] + k[j] * std::complex<double>(h);
  };
  reduced_rhs(model, alpha, t, k1);
  axpy(k1, dt / 2);
  reduced_rhs(model, tmp, t + dt / 2, k2);
  axpy(k2, dt / 2);
  reduced_rhs(model, tmp, t + dt / 2, k3);
  axpy(k3, dt);
  reduced_rhs(model, tmp, t + dt, k4);
  ProfileSet out = alpha;
  for (std::size_t j = 0; j < alpha.size(); ++j)
    out[j] += (k1[j] + k2[j] * std::complex<double>(2) + k3[j] * std::complex<double>(2) + k4[j]) *
              std::complex<double>(dt / 6);
  return out;
}

ProfileSet reduced_integrate(const ReducedModel& model, ProfileSet alpha, double t0, double t1, double dt) {
  double t = t0;
  while (t < t1) {
    const double h = std::min(dt, t1 - t);
    alpha = reduced_step(model, alpha, t, h);
    t = (t1 - t) <= dt ? t1 : t + h;
  }
  return alpha;
}

ScatteringEstimate scattering_state(const std::vector<ProfileData>& series, double fit_lo, double fit_hi) {
  if (series.size() < 2) throw std::invalid_argument("scattering_state: need a time series of profiles");
  const ProfileData& last = series.back();
  const double first_positive = [&] {
    for (const auto& p : series)
      if (p.time > 0) return p.time;
    return last.time;
  }();
  if (last.time < 8 * first_positive)
    throw std::invalid_argument("scattering_state: series must span T_end >= 8 x first sample time");
  ScatteringEstimate est{last.values, {}, {}, {}, {}, true};
  std::vector<double> ft, fv;
  for (const auto& p : series) {
    if (p.time <= 0 || &p == &last) continue;
    const Spectrum d = p.values - last.values;
    est.times.push_back(p.time);
    est.l2_error.push_back(l2_norm(d));
    est.linf_error.push_back(linf_norm(d));
    ft.push_back(p.time);
    fv.push_back(est.l2_error.back() + est.linf_error.back());
  }
  bool all_zero = std::all_of(fv.begin(), fv.end(), [](double v) { return v == 0; });
  if (all_zero) {
    est.convergence.t_lo = fit_lo;
    est.convergence.t_hi = fit_hi;
    est.convergence.r_squared = 1;
    est.convergence.exponent = -std::numeric_limits<double>::infinity();
    return est;
  }
  est.convergence = fit_decay(ft, fv, fit_lo, fit_hi);
  est.monotone = est.convergence.r_squared >= 0.8;
  return est;
}

double profile_error_linf(const Field& u, double t, const Mass& m, const Spectrum& alpha_plus) {
  if (!(t >= 1)) throw std::invalid_argument("profile_error_linf needs t >= 1");
  return linf_norm(u - gauge_M(dilate_D(alpha_plus, t), m, t));
}

ConservationSeries resonant_conserved_monitor(const std::vector<ProfileData>& alpha, const std::vector<ProfileData>& beta,
                                              const Mass& m, const Mass& mu, std::complex<double> kappa,
                                              std::complex<double> lambda, double band) {
  const bool exact_resonance = m.exact() && mu.exact() ? *mu.exact() == Rational(3) * *m.exact()
                                                       : std::abs(mu.value() - 3 * m.value()) <=
                                                             resonance_tolerance * std::abs(mu.value());
  if (!exact_resonance) throw std::invalid_argument("conserved-combination monitor requires mu = 3m");
  const std::complex<double> kl = kappa * lambda;
  const double scale = std::max(std::abs(kappa) * std::abs(kappa), 1e-300);
  if (!(kl.real() < 0) || std::abs(kl.imag()) > 1e-12 * std::abs(kl))
    throw std::invalid_argument("conserved-combination monitor requires lambda = -c conj(kappa) with c > 0 "
                                "(Re(kappa lambda) < 0, Im(kappa lambda) = 0)");
  if (alpha.size() != beta.size() || alpha.empty()) throw std::invalid_argument("profile series differ in length");
  ConservationSeries out;
  out.c = -kl.real() / scale;
  const double w_balanced = out.c * m.value() / mu.value();
  const Grid& g = alpha[0].values.grid();
  std::vector<Index> idx;
  for (Index i = 0; i < g.size(); ++i)
    if (std::abs(g.frequency(i)) <= band) idx.push_back(i);
  auto combo = [&](std::size_t s, double w) {
    RealArray<double> q(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k)
      q[k] = w * std::norm(alpha[s].values[idx[k]]) + std::norm(beta[s].values[idx[k]]);
    return q;
  };
  const RealArray<double> q0 = combo(0, out.c), b0 = combo(0, w_balanced);
  const double n0 = q0.maxCoeff(), nb = b0.maxCoeff();
  for (std::size_t s = 0; s < alpha.size(); ++s) {
    out.times.push_back(alpha[s].time);
    out.drift.push_back(n0 > 0 ? (combo(s, out.c) - q0).abs().maxCoeff() / n0 : 0.0);
    out.balanced_drift.push_back(nb > 0 ? (combo(s, w_balanced) - b0).abs().maxCoeff() / nb : 0.0);
    out.max_drift = std::max(out.max_drift, out.drift.back());
    out.max_balanced_drift = std::max(out.max_balanced_drift, out.balanced_drift.back());
  }
  return out;
}

GrowthVerdict blowup_monitor(const std::vector<double>& t, const std::vector<double>& v_l2, double t_ref,
                             double required_growth) {
  if (t.size() != v_l2.size()) throw std::invalid_argument("blowup_monitor: series differ in length");
  std::vector<double> window;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= t_ref) window.push_back(v_l2[i]);
  if (window.size() < 4) throw std::invalid_argument("blowup_monitor: too few samples after t_ref");
  GrowthVerdict g;
  const double ref = window.front();
  if (ref <= 0) return g;
  g.relative_growth = window.back() / ref - 1;
  const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
  g.relative_variation = (*hi - *lo) / ref;
  g.eventually_increasing = true;
  for (std::size_t i = window.size() / 2; i + 1 < window.size(); ++i)
    if (!(window[i + 1] > window[i])) g.eventually_increasing = false;
  g.growing = g.relative_growth >= required_growth && g.eventually_increasing;
  return g;
}

PhaseDriftFit modified_scattering_check(const std::vector<ProfileData>& series, double xi, double t_lo, double t_hi) {
  if (series.empty()) throw std::invalid_argument("modified_scattering_check: empty series");
  const std::vector<double> at{xi};
  std::vector<double> logt, phase, modulus;
  double previous = 0;
  bool first = true;
  for (const auto& p : series) {
    if (p.time < t_lo || p.time > t_hi) continue;
    const std::complex<double> a = sample_offgrid(p.values, std::span<const double>(at))[0];
    if (a == 0.0) throw std::runtime_error("modified_scattering_check: profile vanishes; phase undefined");
    double ph = std::arg(a);
    if (!first) {
      const double jump = std::remainder(ph - previous, 2 * std::numbers::pi);
      if (std::abs(jump) > std::numbers::pi / 2)
        throw std::runtime_error("phase unwrapping failed near t = " + std::to_string(p.time) +
                                 ": snapshots too sparse for the phase drift");
      ph = previous + jump;
    }
    previous = ph;
    first = false;
    logt.push_back(std::log(p.time));
    phase.push_back(ph);
    modulus.push_back(std::abs(a));
  }
  if (static_cast<int>(logt.size()) < min_fit_samples)
    throw std::invalid_argument("modified_scattering_check: fewer than " + std::to_string(min_fit_samples) +
                                " snapshots in the fit window");
  const double n = static_cast<double>(logt.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < logt.size(); ++i) {
    mx += logt[i];
    my += phase[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < logt.size(); ++i) {
    sxx += (logt[i] - mx) * (logt[i] - mx);
    sxy += (logt[i] - mx) * (phase[i] - my);
  }
  PhaseDriftFit fit;
  fit.xi = xi;
  fit.slope = sxy / sxx;
  const double final_modulus = std::abs(sample_offgrid(series.back().values, std::span<const double>(at))[0]);
  fit.predicted_slope = -final_modulus * final_modulus;
  for (double mval : modulus) fit.modulus_variation = std::max(fit.modulus_variation, std::abs(mval / final_modulus - 1));
  return fit;
}

}  // namespace dnls
