#include "dnls/experiments.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

using namespace dnls;
namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, verdict_failed = 1, bad_input = 2, solver_abort = 3 };

struct Options {
  ExperimentConfig cfg;
  std::string system = "nls3";
  double kappa_re = 1, kappa_im = 0, lambda_re = 1, lambda_im = 0;
  std::string out_dir = "out";
  int workers = 1;

  ExperimentConfig resolved() const {
    ExperimentConfig c = cfg;
    c.system = parse_system_choice(system);
    c.kappa = {kappa_re, kappa_im};
    c.lambda = {lambda_re, lambda_im};
    if (!c.spec_file.empty() && system == "nls3" ) c.system = SystemChoice::custom;
    return c;
  }
};

void add_system_flags(CLI::App* app, Options& o) {
  app->add_option("--system", o.system, "nls2 | nls3 | single | custom")->check(CLI::IsMember({"nls2", "nls3", "single", "custom"}));
  app->add_option("--m", o.cfg.m, "first mass (p/q or decimal)");
  app->add_option("--mu", o.cfg.mu, "second mass (p/q or decimal)");
  app->add_option("--kappa-re", o.kappa_re);
  app->add_option("--kappa-im", o.kappa_im);
  app->add_option("--lambda-re", o.lambda_re);
  app->add_option("--lambda-im", o.lambda_im);
  app->add_option("--spec-file", o.cfg.spec_file, "custom system description")->check(CLI::ExistingFile);
}

void add_run_flags(CLI::App* app, Options& o) {
  app->add_option("--L", o.cfg.L, "box half-length");
  app->add_option("--N", o.cfg.N, "grid points (power of two)");
  app->add_option("--dt", o.cfg.dt);
  app->add_option("--t-end", o.cfg.t_end);
  app->add_option("--eps", o.cfg.eps, "data amplitude");
  app->add_option("--gamma", o.cfg.gamma, "weight exponent in E");
  app->add_option("--boundary-threshold", o.cfg.boundary_threshold);
  app->add_option("--per-decade", o.cfg.per_decade, "log-spaced snapshots per decade");
  app->add_option("--widths", o.cfg.widths, "Gaussian widths per component")->delimiter(',');
  app->add_option("--amplitudes", o.cfg.amplitudes, "relative amplitudes per component")->delimiter(',');
}

void add_analysis_flags(CLI::App* app, Options& o) {
  app->add_option("--band", o.cfg.band, "frequency band of sup diagnostics");
  app->add_option("--fit-lo", o.cfg.fit_lo);
  app->add_option("--fit-hi", o.cfg.fit_hi);
  app->add_option("--delta", o.cfg.delta, "allowance on the scattering exponent");
}

void add_output_flags(CLI::App* app, Options& o) {
  app->add_option("--out-dir", o.out_dir);
  app->add_option("--workers", o.workers, "concurrent runs")->check(CLI::PositiveNumber);
}

std::string exact_or_number(const std::optional<Rational>& exact, double v) {
  return exact ? exact->to_string() : format_double(v);
}

int cmd_classify(const Options& o) {
  const ExperimentConfig cfg = o.resolved();
  const SystemSpec spec = cfg.build_spec();
  const ResonanceReport report = classify(spec);
  fs::create_directories(o.out_dir);
  CsvWriter w(fs::path(o.out_dir) / "classify.csv",
              {"term", "target", "factors", "mass_sum", "resonant_zero", "resonant_self", "derivative_free", "omega"},
              cfg.hash());
  std::printf("%-5s %-7s %-18s %-10s %-6s %-6s %-6s %s\n", "term", "target", "slot:derivative", "mass_sum", "zero", "self",
              "nodx", "omega");
  for (std::size_t i = 0; i < report.terms.size(); ++i) {
    const TermResonance& r = report.terms[i];
    const CubicTerm& t = spec.terms()[i];
    std::string factors;
    // same slot numbering as spec files: slots past the component count are conjugates
    for (const auto& f : t.factors)
      factors += (factors.empty() ? "" : " ") + std::to_string(f.slot + 1) + ":" + std::to_string(f.derivative);
    const std::string sum = exact_or_number(r.exact_mass_sum, r.mass_sum);
    const std::string omega = r.omega ? exact_or_number(r.exact_omega, *r.omega) : "undefined";
    std::printf("%-5zu %-7d %-18s %-10s %-6d %-6d %-6d %s\n", i + 1, t.target + 1, factors.c_str(), sum.c_str(),
                r.resonant_zero, r.resonant_self, r.derivative_free, omega.c_str());
    w.row({static_cast<long long>(i + 1), static_cast<long long>(t.target + 1), factors, sum,
           static_cast<long long>(r.resonant_zero), static_cast<long long>(r.resonant_self),
           static_cast<long long>(r.derivative_free), omega});
  }
  std::printf("verdict: %s\nregularity: %s\n", report.covered ? "covered" : "not covered",
              to_string(report.regularity).c_str());
  return ok;
}

int report_abort(const SolverAbort& e, const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path dump = dir / "last_good.bin";
  write_snapshot(dump, e.last_good_state());
  std::fprintf(stderr, "solver aborted (%s): %s\nlast good state (t = %s) written to %s\n",
               e.reason() == SolverAbort::Reason::blowup ? "blow-up" : "boundary", e.what(),
               format_double(e.last_good_state().time).c_str(), dump.string().c_str());
  return solver_abort;
}

int cmd_simulate(const Options& o) {
  const ExperimentConfig cfg = o.resolved();
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  SnapshotWriter writer(dir / "run", cfg.build_spec());
  try {
    const Simulation sim = simulate(cfg, std::nullopt, std::ref(writer));
    write_diagnostics_csv(dir / "diagnostics.csv", sim);
    const DiagnosticsRecord& last = sim.diagnostics.back();
    std::printf("completed t = %s in %.1f s; final boundary mass fraction %.3g (threshold %.3g)\n",
                format_double(last.time).c_str(), sim.seconds, last.boundary_mass_fraction, cfg.boundary_threshold);
    std::printf("snapshots in %s, diagnostics in %s\n", (dir / "run").string().c_str(),
                (dir / "diagnostics.csv").string().c_str());
  } catch (const SolverAbort& e) {
    return report_abort(e, dir);
  }
  return ok;
}

int cmd_asymptotics(const Options& o, const std::string& run_dir) {
  const ExperimentConfig cfg = o.resolved();
  const fs::path dir(o.out_dir);
  const fs::path source = run_dir.empty() ? dir / "run" : fs::path(run_dir);
  const Simulation sim = load_simulation(source, cfg);
  const std::vector<ScatteringReport> reports = scattering_report(sim);
  fs::create_directories(dir);
  write_scattering_csv(dir, sim, reports);
  std::printf("%-9s %-28s %10s %8s %16s\n", "component", "quantity", "exponent", "r^2", "window");
  bool pass = true;
  for (const auto& r : reports) {
    const std::pair<const char*, const DecayFit*> fits[] = {{"||alpha - alpha_+||_L2", &r.l2_fit},
                                                            {"profile error L-inf", &r.profile_error_fit}};
    for (const auto& [name, f] : fits)
      std::printf("%-9d %-28s %10.4f %8.4f %7.3g..%-7.3g\n", r.component + 1, name, f->exponent, f->r_squared, f->t_lo,
                  f->t_hi);
    pass = pass && r.l2_fit.exponent <= -0.25 + cfg.delta && r.profile_error_fit.exponent <= -0.60;
  }
  std::printf("verdict: %s (L2 exponent <= %.2f, profile error exponent <= -0.60)\n", pass ? "PASS" : "FAIL",
              -0.25 + cfg.delta);
  return pass ? ok : verdict_failed;
}

int cmd_fit(const std::string& csv, const std::string& column, const std::string& time_column, double lo, double hi) {
  const CsvTable table = read_csv(csv);
  const std::vector<double> t = table.numeric_column(time_column), v = table.numeric_column(column);
  const DecayFit f = fit_decay(t, v, lo, hi);
  std::printf("%-24s %12s %12s %10s %8s\n", "column", "exponent", "intercept", "r^2", "samples");
  std::printf("%-24s %12.6f %12.6f %10.6f %8d\n", column.c_str(), f.exponent, f.intercept, f.r_squared, f.samples);
  return ok;
}

// Runs the configurations concurrently on up to `workers` threads; results
// come back in input order.
template <typename Result>
std::vector<Result> run_all(const std::vector<std::function<Result()>>& jobs, int workers) {
  std::vector<std::optional<Result>> slots(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      try {
        slots[i] = jobs[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min<int>(workers, static_cast<int>(jobs.size())); ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  std::vector<Result> out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

std::vector<Simulation> simulate_all(const std::vector<ExperimentConfig>& configs, int workers) {
  std::vector<std::function<Simulation()>> jobs;
  for (const auto& c : configs) jobs.push_back([c] { return simulate(c); });
  return run_all(jobs, workers);
}

int finish_demo(const std::vector<Verdict>& verdicts, const std::vector<const Simulation*>& runs, const fs::path& dir) {
  fs::create_directories(dir);
  std::string hash = "selftest";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    write_diagnostics_csv(dir / ("diagnostics_" + std::to_string(i + 1) + ".csv"), *runs[i]);
    hash = i == 0 ? runs[i]->config.hash() : config_hash({{"a", hash}, {"b", runs[i]->config.hash()}});
  }
  write_verdict_csv(dir / "verdicts.csv", verdicts, hash);
  bool pass = true;
  for (const Verdict& v : verdicts) {
    std::cout << v.summary() << "\n";
    pass = pass && v.pass();
  }
  return pass ? ok : verdict_failed;
}

int cmd_demo(const std::string& name, const Options& o) {
  const fs::path dir(o.out_dir);
  try {
    if (name == "operator-selftest") return finish_demo({operator_selftest(), solver_selftest()}, {}, dir);
    if (name == "blowup") {
      const auto runs = simulate_all({presets::blowup(true), presets::blowup(false)}, o.workers);
      return finish_demo({resonant_divergence(runs[0], runs[1])}, {&runs[0], &runs[1]}, dir);
    }
    if (name == "conserved") {
      const auto runs = simulate_all({presets::conserved(0.05), presets::conserved(0.025)}, o.workers);
      return finish_demo({conserved_combination(runs[0], runs[1])}, {&runs[0], &runs[1]}, dir);
    }
    if (name == "modified-scattering") {
      const auto runs = simulate_all({presets::single_cubic(0.1), presets::single_cubic(0.2)}, o.workers);
      return finish_demo({modified_scattering(runs[0], runs[1])}, {&runs[0], &runs[1]}, dir);
    }
  } catch (const SolverAbort& e) {
    return report_abort(e, dir);
  }
  throw std::invalid_argument("unknown demo '" + name + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_sweep(const Options& o, const std::string& eps_list, const std::string& mu_list) {
  const ExperimentConfig base = o.resolved();
  std::vector<ExperimentConfig> configs;
  const std::vector<std::string> mus = mu_list.empty() ? std::vector<std::string>{base.mu} : split_list(mu_list);
  const std::vector<std::string> epss =
      eps_list.empty() ? std::vector<std::string>{format_double(base.eps)} : split_list(eps_list);
  for (const auto& mu : mus)
    for (const auto& eps : epss) {
      ExperimentConfig c = base;
      c.mu = mu;
      c.eps = std::stod(eps);
      c.validate();
      configs.push_back(c);
    }

  struct Row {
    std::string status = "ok";
    std::vector<std::optional<double>> linf_exponent;
    std::optional<double> profile_slope;
    double e_max = 0, data_norm = 0, boundary = 0;
  };
  // a window too short for a fit leaves the cell empty rather than failing the run
  auto try_fit = [](const std::vector<double>& t, const std::vector<double>& v, double lo,
                    double hi) -> std::optional<double> {
    try {
      return fit_decay(t, v, lo, hi).exponent;
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
  };
  std::vector<std::function<Row()>> jobs;
  for (const auto& c : configs)
    jobs.push_back([c, try_fit] {
      Row r;
      try {
        const Simulation sim = simulate(c);
        std::vector<double> t, prof_t, prof;
        for (const auto& d : sim.diagnostics) {
          t.push_back(d.time);
          r.e_max = std::max(r.e_max, d.E_value);
          if (d.time >= 1) {
            prof_t.push_back(d.time);
            prof.push_back(d.profile_linf);
          }
        }
        for (int j = 0; j < sim.spec.components(); ++j) {
          std::vector<double> linf;
          for (const auto& d : sim.diagnostics) linf.push_back(d.components[j].linf);
          r.linf_exponent.push_back(try_fit(t, linf, c.fit_lo, c.fit_hi));
        }
        r.data_norm = sim.data_norm;
        r.boundary = sim.diagnostics.back().boundary_mass_fraction;
        r.profile_slope = try_fit(prof_t, prof, 1, c.t_end);
      } catch (const SolverAbort& e) {
        r.status = e.reason() == SolverAbort::Reason::blowup ? "abort_blowup" : "abort_boundary";
      } catch (const std::exception& e) {
        r.status = std::string("error: ") + e.what();
        std::replace(r.status.begin(), r.status.end(), ',', ';');
      }
      return r;
    });
  const std::vector<Row> rows = run_all(jobs, o.workers);

  fs::create_directories(o.out_dir);
  std::string hash = base.hash();
  for (const auto& c : configs) hash = config_hash({{"a", hash}, {"b", c.hash()}});
  CsvWriter w(fs::path(o.out_dir) / "sweep.csv",
              {"index", "system", "m", "mu", "eps", "status", "linf_exponent_1", "linf_exponent_2", "E_max", "eps_norm",
               "final_boundary_mass_fraction", "profile_slope"},
              hash);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const Row& r = rows[i];
    auto cell = [](const std::optional<double>& v) -> CsvWriter::Cell {
      return v ? CsvWriter::Cell(*v) : CsvWriter::Cell(std::string());
    };
    auto exp_of = [&](std::size_t j) { return cell(j < r.linf_exponent.size() ? r.linf_exponent[j] : std::nullopt); };
    w.row({static_cast<long long>(i + 1), to_string(configs[i].system), configs[i].m, configs[i].mu, configs[i].eps,
           r.status, exp_of(0), exp_of(1), r.e_max, r.data_norm, r.boundary, cell(r.profile_slope)});
    std::printf("%3zu mu=%-6s eps=%-8g %-14s", i + 1, configs[i].mu.c_str(), configs[i].eps, r.status.c_str());
    for (const auto& e : r.linf_exponent)
      if (e) std::printf(" linf_exp=%.4f", *e);
    std::printf("\n");
  }
  auto has = [&](const char* prefix) {
    return std::any_of(rows.begin(), rows.end(), [&](const Row& r) { return r.status.rfind(prefix, 0) == 0; });
  };
  return has("error") ? bad_input : has("abort") ? solver_abort : ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and asymptotic analysis of coupled derivative Schrodinger systems"};
  app.set_config("--config", "", "INI file; [section] names match subcommands");
  app.require_subcommand(1);
  Options o;

  auto* classify_cmd = app.add_subcommand("classify", "resonance report for a system");
  add_system_flags(classify_cmd, o);
  add_output_flags(classify_cmd, o);

  auto* simulate_cmd = app.add_subcommand("simulate", "run the solver; writes snapshots and diagnostics.csv");
  add_system_flags(simulate_cmd, o);
  add_run_flags(simulate_cmd, o);
  add_analysis_flags(simulate_cmd, o);
  add_output_flags(simulate_cmd, o);

  std::string run_dir;
  auto* asym_cmd = app.add_subcommand("asymptotics", "scattering state and error rates of a stored run");
  asym_cmd->add_option("--run-dir", run_dir, "snapshot directory (default <out-dir>/run)");
  add_system_flags(asym_cmd, o);
  add_analysis_flags(asym_cmd, o);
  add_output_flags(asym_cmd, o);

  std::string csv, column, time_column = "time";
  double lo = 0, hi = std::numeric_limits<double>::infinity();
  auto* fit_cmd = app.add_subcommand("fit", "power-law fit of one CSV column against time");
  fit_cmd->add_option("csv", csv)->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--column", column)->required();
  fit_cmd->add_option("--time-column", time_column);
  fit_cmd->add_option("--t-lo", lo);
  fit_cmd->add_option("--t-hi", hi);

  std::string demo_name;
  auto* demo_cmd = app.add_subcommand("demo", "canned experiments with PASS/FAIL verdicts");
  demo_cmd->add_option("name", demo_name)
      ->required()
      ->check(CLI::IsMember({"blowup", "conserved", "modified-scattering", "operator-selftest"}));
  add_output_flags(demo_cmd, o);

  std::string eps_list, mu_list;
  auto* sweep_cmd = app.add_subcommand("sweep", "independent runs over eps and mu values");
  sweep_cmd->add_option("--eps-list", eps_list, "comma-separated amplitudes");
  sweep_cmd->add_option("--mu-list", mu_list, "comma-separated second masses");
  add_system_flags(sweep_cmd, o);
  add_run_flags(sweep_cmd, o);
  add_analysis_flags(sweep_cmd, o);
  add_output_flags(sweep_cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : bad_input;
  }

  try {
    if (*classify_cmd) return cmd_classify(o);
    if (*simulate_cmd) return cmd_simulate(o);
    if (*asym_cmd) return cmd_asymptotics(o, run_dir);
    if (*fit_cmd) return cmd_fit(csv, column, time_column, lo, hi);
    if (*demo_cmd) return cmd_demo(demo_name, o);
    if (*sweep_cmd) return cmd_sweep(o, eps_list, mu_list);
  } catch (const SolverAbort& e) {
    return report_abort(e, o.out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return bad_input;
  }
  return bad_input;
}
