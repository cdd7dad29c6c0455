#include "dnls/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace dnls {

std::string config_hash(const std::map<std::string, std::string>& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& [k, v] : config) feed(k + "=" + v + "\n");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns, const std::string& hash)
    : path_(path), out_(path), columns_(columns.size()) {
  if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
  out_ << "# config_hash=" << hash << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != columns_) throw std::invalid_argument("CSV row width does not match header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    if (const double* d = std::get_if<double>(&cells[i]))
      out_ << format_double(*d);
    else if (const long long* n = std::get_if<long long>(&cells[i]))
      out_ << *n;
    else
      out_ << std::get<std::string>(cells[i]);
  }
  out_ << '\n';
  out_.flush();
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  std::size_t col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) col = i;
  if (col == header.size()) throw std::invalid_argument("CSV has no column '" + name + "'");
  std::vector<double> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::size_t used = 0;
    const std::string& cell = rows[r].at(col);
    double v = 0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != cell.size() || cell.empty())
      throw std::runtime_error("CSV row " + std::to_string(r + 1) + ": '" + cell + "' in column '" + name +
                               "' is not a number");
    out.push_back(v);
  }
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (t.header.empty())
      t.header = split(line);
    else
      t.rows.push_back(split(line));
  }
  if (t.header.empty()) throw std::runtime_error("'" + path.string() + "' has no header row");
  return t;
}

namespace {

constexpr const char* snapshot_magic = "dnls-snapshot 1";

void put_le(std::ostream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

double get_le(std::istream& in) {
  std::uint64_t bits = 0;
  in.read(reinterpret_cast<char*>(&bits), sizeof bits);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const SolutionState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write snapshot '" + path.string() + "'");
  const Grid& g = state.grid();
  out << snapshot_magic << '\n'
      << "time " << format_double(state.time) << '\n'
      << "components " << state.fields.size() << '\n'
      << "grid " << g.size() << ' ' << format_double(g.half_length()) << '\n';
  for (const Field& f : state.fields)
    for (Index n = 0; n < f.size(); ++n) {
      put_le(out, f[n].real());
      put_le(out, f[n].imag());
    }
  if (!out) throw std::runtime_error("failed writing snapshot '" + path.string() + "'");
}

SolutionState read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot '" + path.string() + "'");
  std::string magic, key;
  std::getline(in, magic);
  if (magic != snapshot_magic) throw std::runtime_error("'" + path.string() + "' is not a snapshot file");
  SolutionState s;
  std::size_t components = 0;
  Index n = 0;
  double half_length = 0;
  in >> key >> s.time;
  if (key != "time") throw std::runtime_error("snapshot header: expected 'time'");
  in >> key >> components;
  if (key != "components") throw std::runtime_error("snapshot header: expected 'components'");
  in >> key >> n >> half_length;
  if (key != "grid" || !in) throw std::runtime_error("snapshot header: expected 'grid N L'");
  in.get();  // newline ending the header
  const Grid g(n, half_length);
  for (std::size_t c = 0; c < components; ++c) {
    Field f(g);
    for (Index i = 0; i < n; ++i) {
      const double re = get_le(in);
      const double im = get_le(in);
      f[i] = {re, im};
    }
    s.fields.push_back(std::move(f));
  }
  if (!in) throw std::runtime_error("snapshot '" + path.string() + "' is truncated");
  return s;
}

SnapshotWriter::SnapshotWriter(const std::filesystem::path& root, const SystemSpec& spec) : root_(root) {
  std::filesystem::create_directories(root_);
  std::ofstream(root_ / "system.spec") << format_system_spec(spec);
  manifest_.open(root_ / "manifest.txt");
  if (!manifest_) throw std::runtime_error("cannot write manifest in '" + root_.string() + "'");
}

void SnapshotWriter::operator()(const SolutionState& state) {
  char name[32];
  std::snprintf(name, sizeof name, "snap_%05d.bin", index_);
  write_snapshot(root_ / name, state);
  manifest_ << index_ << ' ' << format_double(state.time) << ' ' << name << '\n';
  manifest_.flush();
  ++index_;
}

RunDirectory open_run_directory(const std::filesystem::path& root) {
  std::ifstream in(root / "manifest.txt");
  if (!in) throw std::runtime_error("'" + root.string() + "' has no manifest.txt");
  RunDirectory dir{root, {}, {}};
  int index = 0;
  double t = 0;
  std::string file;
  while (in >> index >> t >> file) {
    dir.times.push_back(t);
    dir.files.push_back(root / file);
  }
  return dir;
}

}  // namespace dnls
