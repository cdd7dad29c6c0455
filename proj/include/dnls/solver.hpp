#pragma once

#include "dnls/system.hpp"

#include <functional>
#include <optional>

namespace dnls {

struct RunConfig {
  double dt = 0.01;
  double t_end = 200;
  std::vector<double> snapshot_times;  // sorted, within [0, t_end]
  double boundary_mass_threshold = 1e-4;
  double epsilon_scale = 0.05;
  double gamma = 0.1;
  int boundary_check_interval = 10;  // steps between boundary-mass checks

  void validate() const;
};

// t = 0 followed by `per_decade` logarithmically spaced times from t_first to t_end
std::vector<double> log_snapshot_times(double t_first, double t_end, int per_decade = 32);

struct ComponentDiagnostics {
  double l2 = 0;
  double linf = 0;
  double h2 = 0;
  double J_h1 = 0;   // ||J_m u||_{H^1}
  double P_l2 = 0;   // ||P u||_{L^2} with L_m u = F
};

struct DiagnosticsRecord {
  double time = 0;
  std::vector<ComponentDiagnostics> components;
  double profile_linf = 0;
  double E_value = 0;  // profile_linf + (1+t)^{-gamma/3} sum (||u||_{H^2} + ||J u||_{H^1})
  double boundary_mass_fraction = 0;
  double spectral_tail_fraction = 0;  // energy in the top sixth of the band
};

// Mass in |x| >= 0.9 L, as a fraction of the total over all components.
double boundary_mass_fraction(const std::vector<Field>& fields);
double spectral_tail_fraction(const std::vector<Field>& fields);

DiagnosticsRecord diagnostics(const SolutionState& state, const SystemSpec& spec, double profile_linf, double gamma);

class SolverAbort : public std::runtime_error {
 public:
  enum class Reason { blowup, boundary };
  SolverAbort(Reason reason, SolutionState last_good, const std::string& what)
      : std::runtime_error(what), reason_(reason), last_good_(std::move(last_good)) {}
  Reason reason() const { return reason_; }
  const SolutionState& last_good_state() const { return last_good_; }

 private:
  Reason reason_;
  SolutionState last_good_;
};

// Integrating-factor (Lawson) RK4 for d_t u_j = (i/2m_j) u_j'' - i F_j. The
// state is kept as Fourier-series coefficients so the linear flow is exact.
class LawsonIntegrator {
 public:
  LawsonIntegrator(const SystemSpec& spec, const SolutionState& initial);

  // new_time, when given, is recorded instead of time() + dt (exact landing)
  void step(double dt, std::optional<double> new_time = std::nullopt);
  double time() const { return time_; }
  SolutionState state() const;
  const std::vector<ComplexArray<double>>& coefficients() const { return coeffs_; }
  bool finite() const;

 private:
  struct Propagators {
    double dt = 0;
    std::vector<ComplexArray<double>> half, full;
  };
  const Propagators& propagators(double dt);
  void rhs(const std::vector<ComplexArray<double>>& c, std::vector<ComplexArray<double>>& out);

  SystemSpec spec_;
  Grid grid_;
  NonlinearityEvaluator eval_;
  double time_;
  std::vector<ComplexArray<double>> coeffs_;
  std::vector<Propagators> cache_;
  std::vector<ComplexArray<double>> k1_, k2_, k3_, k4_, tmp_, base_;
};

SolutionState step(const SolutionState& state, const SystemSpec& spec, double dt);

struct RunResult {
  SolutionState final_state;
  std::vector<DiagnosticsRecord> diagnostics;
};

using SnapshotSink = std::function<void(const SolutionState&)>;
// sup_xi <xi>(sum_j |alpha_j|) for a state; supplied by the analysis layer
using ProfileProbe = std::function<double(const SolutionState&)>;

RunResult run(const SolutionState& initial, const SystemSpec& spec, const RunConfig& cfg,
              const SnapshotSink& sink = {}, const ProfileProbe& profile = {});

}  // namespace dnls
