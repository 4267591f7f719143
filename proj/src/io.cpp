#include "nefk/io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "nefk/errors.hpp"

namespace nefk {

namespace fs = std::filesystem;

void ensure_directory(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec || !fs::is_directory(path)) throw ConfigError("output directory '" + path + "' cannot be created");
  const fs::path probe = fs::path(path) / ".nefk_write_probe";
  std::ofstream out(probe);
  if (!out) throw ConfigError("output directory '" + path + "' is not writable");
  out.close();
  fs::remove(probe, ec);
}

void write_csv(const std::string& path, const CsvHeader& header, const std::vector<std::string>& names,
               const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size()) throw std::invalid_argument("write_csv: name/column count mismatch");
  std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw std::invalid_argument("write_csv: ragged columns");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "# config_hash: " << header.config_hash << "\n";
  out << "# nefk_version: " << NEFK_VERSION << "\n";
  out << "# schema: 1\n";
  out << "# provenance: " << header.provenance << "\n";
  for (const auto& [k, v] : header.extra) out << "# " << k << ": " << v << "\n";
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  out << "\n" << std::setprecision(17);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i][r];
    out << "\n";
  }
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return columns[i];
  throw std::out_of_range("csv column '" + name + "' not present");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  CsvTable t;
  std::string line;
  bool have_names = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        std::string v = line.substr(colon + 1);
        if (!v.empty() && v[0] == ' ') v.erase(0, 1);
        t.header[line.substr(2, colon - 2)] = v;
      }
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    if (!have_names) {
      while (std::getline(ss, cell, ',')) t.names.push_back(cell);
      t.columns.resize(t.names.size());
      have_names = true;
      continue;
    }
    std::size_t i = 0;
    while (std::getline(ss, cell, ',')) {
      if (i >= t.columns.size()) throw ConfigError("csv row wider than header in " + path);
      t.columns[i++].push_back(std::stod(cell));
    }
    if (i != t.columns.size()) throw ConfigError("csv row narrower than header in " + path);
  }
  return t;
}

void save_checkpoint(const std::string& dir, const std::string& tag, const ContourKernel& sigma,
                     const Checkpoint& meta) {
  ensure_directory(dir);
  const fs::path snap = fs::path(dir) / (tag + ".snap"), man = fs::path(dir) / (tag + ".json");
  const fs::path tmp_snap = snap.string() + ".tmp", tmp_man = man.string() + ".tmp";
  write_snapshot(tmp_snap.string(), sigma);
  nlohmann::json j{{"iteration", meta.iteration},
                   {"residuals", meta.residuals},
                   {"config_hash", meta.config_hash},
                   {"dt", meta.dt},
                   {"seconds", meta.seconds}};
  {
    std::ofstream out(tmp_man);
    out << j.dump(2) << "\n";
  }
  fs::rename(tmp_snap, snap);
  fs::rename(tmp_man, man);
}

bool load_checkpoint(const std::string& dir, const std::string& tag, const GridPtr& grid, ContourKernel& sigma,
                     Checkpoint& meta) {
  const fs::path snap = fs::path(dir) / (tag + ".snap"), man = fs::path(dir) / (tag + ".json");
  if (!fs::exists(snap) || !fs::exists(man)) return false;
  std::ifstream in(man);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception&) {
    return false;
  }
  Checkpoint m;
  m.iteration = j.value("iteration", 0);
  m.residuals = j.value("residuals", std::vector<double>{});
  m.config_hash = j.value("config_hash", std::string{});
  m.dt = j.value("dt", 0.0);
  m.seconds = j.value("seconds", 0.0);
  if (!meta.config_hash.empty() && m.config_hash != meta.config_hash) return false;
  ContourKernel k = read_snapshot(snap.string());
  if (!k.grid->same_as(*grid)) return false;
  sigma = ContourKernel{grid, std::move(k.values)};
  meta = m;
  return true;
}

}  // namespace nefk
