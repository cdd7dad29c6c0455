#include "doctest.h"
#include "dnls/experiments.hpp"

using namespace dnls;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_run() {
  ExperimentConfig c;
  c.L = 50;
  c.N = 512;
  c.dt = 0.05;
  c.t_end = 4;
  c.per_decade = 8;
  return c;
}

}  // namespace

TEST_CASE("config validation and spec building") {
  ExperimentConfig c = small_run();
  CHECK_NOTHROW(c.validate());
  CHECK(c.build_spec().kind() == SystemKind::nls3);

  c.N = 500;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_run();
  c.dt = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_run();
  c.mu = "2/0";
  CHECK_THROWS(c.build_spec());

  c = small_run();
  c.system = SystemChoice::nls2;
  c.mu = "3";
  const ResonanceReport r = classify(c.build_spec());
  CHECK(r.terms[0].resonant_self);
  CHECK(r.terms[1].resonant_self);

  CHECK(parse_system_choice("single") == SystemChoice::single);
  CHECK_THROWS_AS(parse_system_choice("quartic"), std::invalid_argument);
}

TEST_CASE("run config lands the fixed times") {
  ExperimentConfig c = small_run();
  c.t_end = 50;
  const std::vector<double> times = c.run_config().snapshot_times;
  for (double t : {0.0, 1.0, 10.0, 20.0, 50.0}) CHECK(std::count(times.begin(), times.end(), t) == 1);
  CHECK(std::is_sorted(times.begin(), times.end()));
}

TEST_CASE("hash follows the parameters") {
  ExperimentConfig a = small_run(), b = small_run();
  CHECK(a.hash() == b.hash());
  b.eps = 0.025;
  CHECK(a.hash() != b.hash());
  b = small_run();
  b.widths = {2, 1.5};
  CHECK(a.hash() != b.hash());
}

TEST_CASE("zero data gives an all-zero diagnostics table") {
  ExperimentConfig c = small_run();
  c.eps = 0;
  const Simulation sim = simulate(c);
  CHECK(sim.data_norm == 0);
  const fs::path dir = fs::temp_directory_path() / "dnls_test_zero";
  fs::create_directories(dir);
  write_diagnostics_csv(dir / "d.csv", sim);
  const CsvTable t = read_csv(dir / "d.csv");
  REQUIRE(t.rows.size() == sim.diagnostics.size());
  for (const std::string& col : t.header) {
    if (col == "time") continue;
    for (double v : t.numeric_column(col)) CHECK(v == 0);
  }
}

TEST_CASE("simulation keeps one profile set per snapshot") {
  const Simulation sim = simulate(small_run());
  CHECK(sim.states.size() == sim.diagnostics.size());
  CHECK(sim.profiles.size() == sim.states.size());
  CHECK(sim.profiles.front().size() == 2);
  CHECK(sim.times().back() == doctest::Approx(4));
  CHECK(sim.series(1).size() == sim.states.size());
  CHECK(sim.data_norm > 0);

  // same configuration, same bytes
  const Simulation again = simulate(small_run());
  for (std::size_t k = 0; k < sim.states.size(); ++k)
    for (int j = 0; j < 2; ++j) CHECK((sim.states[k].fields[j].values() == again.states[k].fields[j].values()).all());
}

TEST_CASE("stored runs reload to the same diagnostics") {
  const ExperimentConfig c = small_run();
  const fs::path dir = fs::temp_directory_path() / "dnls_test_reload";
  fs::remove_all(dir);
  SnapshotWriter w(dir, c.build_spec());
  const Simulation sim = simulate(c, std::nullopt, std::ref(w));
  const Simulation back = load_simulation(dir, c);
  REQUIRE(back.diagnostics.size() == sim.diagnostics.size());
  for (std::size_t k = 0; k < sim.diagnostics.size(); ++k) {
    CHECK(back.diagnostics[k].time == sim.diagnostics[k].time);
    CHECK(back.diagnostics[k].components[0].linf == doctest::Approx(sim.diagnostics[k].components[0].linf).epsilon(1e-14));
    CHECK(back.diagnostics[k].profile_linf == doctest::Approx(sim.diagnostics[k].profile_linf).epsilon(1e-14));
  }
}

TEST_CASE("gates and verdicts") {
  CHECK(gate_le("a", 1, 1).pass);
  CHECK_FALSE(gate_le("a", 1.5, 1).pass);
  CHECK(gate_ge("a", 2, 1).pass);
  CHECK(gate_in("a", 0.5, 0, 1).pass);
  CHECK_FALSE(gate_in("a", 1.5, 0, 1).pass);
  CHECK_FALSE(gate_le("nan", std::nan(""), 1).pass);

  Verdict v{3, "x", {}, {}, 0};
  CHECK_FALSE(v.pass());  // no gates is not a pass
  v.gates.push_back(gate_le("a", 0, 1));
  CHECK(v.pass());
  CHECK(v.summary().rfind("PASS criterion 3", 0) == 0);
  v.gates.push_back(gate_le("b", 2, 1));
  CHECK_FALSE(v.pass());
  CHECK(v.summary().find("<-- FAIL") != std::string::npos);
}
