#include "doctest.h"
#include "dnls/io.hpp"
#include "test_support.hpp"

#include <iterator>

using namespace dnls;
using namespace dnls::test;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dnls_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("config hash is order independent and sensitive to values") {
  const std::map<std::string, std::string> a{{"m", "1"}, {"mu", "2"}}, b{{"mu", "2"}, {"m", "1"}},
      c{{"m", "1"}, {"mu", "2.0"}};
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash({}) == "cbf29ce484222325");  // FNV-1a offset basis
}

TEST_CASE("doubles print with round-trip precision") {
  for (double v : {0.1, 1.0 / 3, -2.5e-300, 6.02214076e23, 0.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("csv write and read back") {
  const fs::path dir = fresh_dir("csv");
  {
    CsvWriter w(dir / "a.csv", {"t", "n", "label"}, "abc");
    w.row({0.1, 3LL, std::string("x")});
    w.row({1.0 / 3, -1LL, std::string("y")});
    CHECK_THROWS_AS(w.row({1.0}), std::invalid_argument);
  }
  const std::string text = slurp(dir / "a.csv");
  CHECK(text.rfind("# config_hash=abc\nt,n,label\n", 0) == 0);
  const CsvTable t = read_csv(dir / "a.csv");
  CHECK(t.header == std::vector<std::string>{"t", "n", "label"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.numeric_column("t")[1] == 1.0 / 3);
  CHECK(t.numeric_column("n")[1] == -1);
  CHECK_THROWS(t.numeric_column("missing"));
  CHECK_THROWS(t.numeric_column("label"));
}

TEST_CASE("identical content gives byte-identical csv") {
  const fs::path dir = fresh_dir("csv_bytes");
  for (const char* name : {"a.csv", "b.csv"}) {
    CsvWriter w(dir / name, {"x", "y"}, config_hash({{"k", "v"}}));
    for (int i = 0; i < 50; ++i) w.row({std::sin(i * 0.37), std::exp(-i / 7.0)});
  }
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
}

TEST_CASE("snapshot round trip is bit exact") {
  const fs::path dir = fresh_dir("snap");
  const Grid g(128, 12.5);
  SolutionState s{1.0 / 7, {random_packets(g, 1), random_packets(g, 2)}};
  write_snapshot(dir / "s.bin", s);
  const SolutionState back = read_snapshot(dir / "s.bin");
  CHECK(back.time == s.time);
  CHECK(back.grid() == g);
  REQUIRE(back.fields.size() == 2);
  for (int j = 0; j < 2; ++j) CHECK((back.fields[j].values() == s.fields[j].values()).all());
  // header then exactly 2 components x 128 points x 16 bytes
  const std::string bytes = slurp(dir / "s.bin");
  const std::string header = "dnls-snapshot 1\ntime " + format_double(s.time) + "\ncomponents 2\ngrid 128 12.5\n";
  CHECK(bytes.rfind(header, 0) == 0);
  CHECK(bytes.size() == header.size() + 2 * 128 * 16);

  {
    std::ofstream(dir / "bad.bin") << "not a snapshot\n";
  }
  CHECK_THROWS(read_snapshot(dir / "bad.bin"));
  {
    std::ofstream(dir / "short.bin", std::ios::binary) << bytes.substr(0, bytes.size() - 8);
  }
  CHECK_THROWS(read_snapshot(dir / "short.bin"));
}

TEST_CASE("run directory via the snapshot sink") {
  const fs::path dir = fresh_dir("rundir");
  const SystemSpec spec = build_nls3(Mass(Rational(1)), Mass(Rational(2)), 1.0, 1.0);
  const Grid g(64, 10.0);
  {
    SnapshotWriter sink(dir, spec);
    for (double t : {0.0, 0.5, 2.0}) sink(SolutionState{t, {gaussian(g, 1.0) * std::complex<double>(t), gaussian(g)}});
  }
  const RunDirectory run = open_run_directory(dir);
  CHECK(run.times == std::vector<double>{0.0, 0.5, 2.0});
  REQUIRE(run.files.size() == 3);
  CHECK(run.files[2].filename() == "snap_00002.bin");
  CHECK(read_snapshot(run.files[1]).time == 0.5);
  const SystemSpec back = load_system_spec((dir / "system.spec").string());
  CHECK(back.components() == 2);
  CHECK(*back.mass(1).exact() == Rational(2));
  CHECK_THROWS(open_run_directory(dir / "nowhere"));
}
