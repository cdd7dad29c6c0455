#pragma once

#include "dnls/system.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace dnls {

// FNV-1a over "key=value\n" lines in key order, as 16 hex digits.
std::string config_hash(const std::map<std::string, std::string>& config);

// %.17g
std::string format_double(double v);

// CSV with a "# config_hash=..." comment line, then a header row. Cells are
// numbers (printed with 17 significant digits) or text.
class CsvWriter {
 public:
  using Cell = std::variant<double, long long, std::string>;

  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns, const std::string& hash);
  void row(const std::vector<Cell>& cells);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<double> numeric_column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

// Text header (magic, time, component count, "N L") followed by interleaved
// little-endian float64 real/imaginary parts, component by component.
void write_snapshot(const std::filesystem::path& path, const SolutionState& state);
SolutionState read_snapshot(const std::filesystem::path& path);

// A run directory: system.spec, manifest.txt ("index time file" per line) and
// the snapshot files.
struct RunDirectory {
  std::filesystem::path root;
  std::vector<double> times;
  std::vector<std::filesystem::path> files;
};

class SnapshotWriter {
 public:
  SnapshotWriter(const std::filesystem::path& root, const SystemSpec& spec);
  void operator()(const SolutionState& state);

 private:
  std::filesystem::path root_;
  std::ofstream manifest_;
  int index_ = 0;
};

RunDirectory open_run_directory(const std::filesystem::path& root);

}  // namespace dnls
