#pragma once
#include <map>
#include <string>
#include <vector>

#include "nefk/config.hpp"
#include "nefk/contour.hpp"

namespace nefk {

struct CsvHeader {
  std::string config_hash;
  std::string provenance;
  std::map<std::string, std::string> extra;
};

// Comment-prefixed header block followed by one named row of columns.
void write_csv(const std::string& path, const CsvHeader& header, const std::vector<std::string>& names,
               const std::vector<std::vector<double>>& columns);

struct CsvTable {
  std::map<std::string, std::string> header;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  const std::vector<double>& column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

void ensure_directory(const std::string& path);

// Checkpoint: sigma snapshot plus a JSON manifest (iteration, residuals, config hash).
struct Checkpoint {
  int iteration = 0;
  std::vector<double> residuals;
  std::string config_hash;
  double dt = 0.0;
  double seconds = 0.0;  // cumulative solve time
};

void save_checkpoint(const std::string& dir, const std::string& tag, const ContourKernel& sigma, const Checkpoint& meta);
bool load_checkpoint(const std::string& dir, const std::string& tag, const GridPtr& grid, ContourKernel& sigma,
                     Checkpoint& meta);

}  // namespace nefk
