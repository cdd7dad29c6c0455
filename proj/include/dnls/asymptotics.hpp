#pragma once

#include "dnls/solver.hpp"

#include <optional>
#include <vector>

namespace dnls {

// alpha_j(t, xi) = F_m U_m(t)^{-1} u_j(t)
struct ProfileData {
  double time;
  int component;
  Spectrum values;
};

ProfileData extract_profile(const SolutionState& state, const Mass& m, int component);
std::vector<ProfileData> extract_profiles(const SolutionState& state, const SystemSpec& spec);

// sup_{|xi| <= band} <xi> sum_j |alpha_j(xi)|
double weighted_profile_sup(const std::vector<ProfileData>& profiles, double band = 4);

struct DecayFit {
  double exponent = 0;
  double intercept = 0;  // log of the prefactor
  double r_squared = 0;
  double t_lo = 0, t_hi = 0;
  int samples = 0;
  double predict(double t) const { return std::exp(intercept) * std::pow(t, exponent); }
};

inline constexpr int min_fit_samples = 8;

// Least squares of log value against log t over samples with t in [t_lo, t_hi].
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value, double t_lo, double t_hi);

// Constant c with W_m(t)^{-1} E^{S-m}(t) f (xi) ~ c sqrt|m/S| e^{i omega t xi^2} f(m xi/S),
// E^a(t) = exp(i a t xi^2 / 2), read off at xi = 0 for a Gaussian f. Also
// evaluated at 2 t_probe; a relative change above `stability_tolerance` throws.
struct StationaryPhaseResult {
  std::complex<double> constant;
  double relative_change = 0;  // |c(2t) - c(t)| / |c(t)|
};
StationaryPhaseResult stationary_phase_constant(const Mass& m, double mass_sum, double t_probe,
                                                double stability_tolerance = 1e-3);

// The same constant by direct quadrature in the original variable (slow, used
// as an independent check).
std::complex<double> stationary_phase_quadrature(double m, double mass_sum, double t);

// Remainder-free reduced equation for one cubic term:
// i d_t alpha_j += (gamma/t) sqrt|r| e^{i omega t xi^2} G(r xi),
// G(y) = C prod_i (i m~_{k_i} y)^{l_i} alpha~_{k_i}(y), r = m_j / S.
struct ReducedTerm {
  int target = 0;
  std::array<FactorRef, 3> factors{};
  std::complex<double> coeff;
  double ratio = 1;              // r
  double omega = 0;
  std::complex<double> gamma{1, 0};
  std::array<double, 3> signed_masses{};
};

struct ReducedModel {
  int components = 0;
  std::vector<ReducedTerm> terms;
  double window = 8;  // frequencies |xi| > window are frozen
};

// gamma per term from stationary_phase_constant; resonant-self terms take
// gamma = 1 and omega = 0. Zero mass sums have no reduced form and throw.
ReducedModel build_reduced_model(const SystemSpec& spec, double t_probe = 100);

using ProfileSet = std::vector<Spectrum>;  // alpha_j on the shared frequency grid

void reduced_rhs(const ReducedModel& model, const ProfileSet& alpha, double t, ProfileSet& out);
ProfileSet reduced_step(const ReducedModel& model, const ProfileSet& alpha, double t, double dt);
ProfileSet reduced_integrate(const ReducedModel& model, ProfileSet alpha, double t0, double t1, double dt);

struct ScatteringEstimate {
  Spectrum alpha_plus;
  std::vector<double> times;
  std::vector<double> l2_error;    // ||alpha(t) - alpha(T_end)||_{L2}
  std::vector<double> linf_error;  // same in sup norm
  DecayFit convergence;            // fit of l2 + linf error
  bool monotone = true;            // r_squared >= 0.8
};

// alpha_plus = alpha(T_end) for one component's time series.
ScatteringEstimate scattering_state(const std::vector<ProfileData>& series, double fit_lo, double fit_hi);

// || u(t) - M_m(t) D(t) alpha_plus ||_{L-infinity}
double profile_error_linf(const Field& u, double t, const Mass& m, const Spectrum& alpha_plus);

struct ConservationSeries {
  double c = 0;
  std::vector<double> times;
  std::vector<double> drift;           // sup drift of c|alpha|^2 + |beta|^2
  std::vector<double> balanced_drift;  // sup drift of (c m/mu)|alpha|^2 + |beta|^2
  double max_drift = 0;
  double max_balanced_drift = 0;
};

// Requires mu = 3m and lambda = -c conj(kappa) with c > 0. Drift is
// max_{|xi|<=band} |Q(t) - Q(t0)| / max_{|xi|<=band} Q(t0).
ConservationSeries resonant_conserved_monitor(const std::vector<ProfileData>& alpha, const std::vector<ProfileData>& beta,
                                              const Mass& m, const Mass& mu, std::complex<double> kappa,
                                              std::complex<double> lambda, double band = 2);

struct GrowthVerdict {
  bool growing = false;
  double relative_growth = 0;     // ||v(t_end)|| / ||v(t_ref)|| - 1
  double relative_variation = 0;  // (max - min) / value at t_ref over the window
  bool eventually_increasing = false;
};

GrowthVerdict blowup_monitor(const std::vector<double>& t, const std::vector<double>& v_l2, double t_ref = 10,
                             double required_growth = 0.25);

struct PhaseDriftFit {
  double xi = 0;
  double slope = 0;            // d arg alpha / d log t
  double predicted_slope = 0;  // -|alpha(T_end, xi)|^2
  double modulus_variation = 0;  // max relative deviation of |alpha(t, xi)| from |alpha(T_end, xi)|
};

// Fits unwrapped arg alpha(t, xi) against log t for t in [t_lo, t_hi].
PhaseDriftFit modified_scattering_check(const std::vector<ProfileData>& series, double xi, double t_lo, double t_hi);

}  // namespace dnls
