#pragma once

#include "dnls/asymptotics.hpp"
#include "dnls/io.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dnls {

enum class SystemChoice { nls2, nls3, single, custom };

SystemChoice parse_system_choice(const std::string& name);
std::string to_string(SystemChoice choice);

// Everything a run or an analysis needs. Masses stay as text so "p/q" input
// keeps exact resonance checks.
struct ExperimentConfig {
  SystemChoice system = SystemChoice::nls3;
  std::string m = "1", mu = "2";
  std::complex<double> kappa{1, 0}, lambda{1, 0};
  std::string spec_file;

  double L = 400;
  Index N = 8192;
  double dt = 0.01;
  double t_end = 200;
  double eps = 0.05;
  double gamma = 0.1;
  double boundary_threshold = 1e-4;
  double t_first = 1;   // first positive snapshot
  int per_decade = 32;  // log-spaced snapshots per decade

  // Gaussian data: u_j(0, x) = eps * amplitude_j * exp(-x^2 / (2 width_j^2));
  // components past the end of the lists reuse the last entry.
  std::vector<double> widths{2, 1};
  std::vector<double> amplitudes{1, 1};

  // analysis
  double band = 4;        // sup_xi diagnostics
  double fit_lo = 20, fit_hi = 200;
  double delta = 0.05;    // allowance on the predicted scattering exponent

  SystemSpec build_spec() const;
  RunConfig run_config() const;
  Grid grid() const { return Grid(N, L); }
  void validate() const;

  std::map<std::string, std::string> entries() const;
  std::string hash() const { return config_hash(entries()); }
};

SolutionState gaussian_data(const ExperimentConfig& cfg, int components);

// sum_j (||u_j||_{H^2} + ||u_j||_{H^{1,1}}), the smallness parameter of the data
double data_norm(const SolutionState& state);

struct Simulation {
  ExperimentConfig config;
  SystemSpec spec;
  double data_norm = 0;
  std::vector<SolutionState> states;                 // one per snapshot
  std::vector<std::vector<ProfileData>> profiles;    // [snapshot][component]
  std::vector<DiagnosticsRecord> diagnostics;
  double seconds = 0;

  std::vector<double> times() const;
  std::vector<ProfileData> series(int component) const;
};

// Runs the configured system from Gaussian data (or `initial` when given).
// SolverAbort propagates.
Simulation simulate(const ExperimentConfig& cfg, const std::optional<SolutionState>& initial = std::nullopt,
                    const SnapshotSink& extra_sink = {});

// Loads a directory written through SnapshotWriter and recomputes profiles
// and diagnostics.
Simulation load_simulation(const std::filesystem::path& dir, const ExperimentConfig& cfg);

// One gated quantity of a criterion.
struct Gate {
  std::string name;
  double value = 0;
  std::string relation;  // "<=", ">=", "in"
  double lo = 0, hi = 0;
  bool pass = false;
};

Gate gate_le(std::string name, double value, double bound);
Gate gate_ge(std::string name, double value, double bound);
Gate gate_in(std::string name, double value, double lo, double hi);

struct Verdict {
  int id = 0;
  std::string title;
  std::vector<Gate> gates;
  std::vector<std::string> notes;  // ungated context
  double seconds = 0;
  bool pass() const;
  std::string summary() const;
};

std::string format_gate(const Gate& g);

// Individual criteria. Each one that needs a long run takes it as an argument
// so a driver can share runs between criteria.
Verdict operator_selftest();
Verdict profile_approximation_rate();
Verdict dispersive_decay(const Simulation& run);
Verdict scattering_rates(const Simulation& run);
Verdict profile_boundedness(const Simulation& nls3_run, const Simulation& nls2_run);
Verdict reduced_model_fidelity(const Simulation& run, double t_start = 20);
Verdict resonant_divergence(const Simulation& resonant, const Simulation& control);
Verdict conserved_combination(const Simulation& run, const Simulation& half_eps_run);
Verdict modified_scattering(const Simulation& run, const Simulation& double_eps_run);
Verdict solver_selftest();

// Canned configurations behind the demos and the acceptance runs.
namespace presets {
ExperimentConfig default_nls3();
ExperimentConfig nls2_bounded();
ExperimentConfig blowup(bool resonant);
ExperimentConfig conserved(double eps);
ExperimentConfig single_cubic(double eps);
}  // namespace presets

// CSV emitters shared by the CLI subcommands.
void write_diagnostics_csv(const std::filesystem::path& path, const Simulation& sim);
void write_verdict_csv(const std::filesystem::path& path, const std::vector<Verdict>& verdicts, const std::string& hash);

struct ScatteringReport {
  int component = 0;
  ScatteringEstimate estimate;
  std::vector<double> profile_error;  // profile_error_linf at estimate.times
  DecayFit l2_fit, profile_error_fit;
};
std::vector<ScatteringReport> scattering_report(const Simulation& sim);
void write_scattering_csv(const std::filesystem::path& dir, const Simulation& sim,
                          const std::vector<ScatteringReport>& reports);

}  // namespace dnls
