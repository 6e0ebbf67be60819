#pragma once

#include "homog/estimates.hpp"

#include <iosfwd>

namespace homog {

// Parsed experiment description.  Flags fill the defaults, a config file
// overrides flags (reproducibility of a run is anchored in the config).
struct ExperimentSpec {
  std::string command;
  std::string example;          // registry name; empty when inline field given
  std::string field_json;       // inline field description (JSON text)
  std::string out_dir = ".";
  int threads = 1;
  unsigned seed = 1;
  int cutoff = 16;
  int cell_cutoff = 0;          // defaults to cutoff
  int grid = 9;
  double tau = 1.0;
  double s = 2.0;
  std::vector<double> eps_list;
  std::vector<std::vector<double>> thetas;
  std::vector<int> k_indices = {2, 4, 8};
  std::vector<int> m_list = {8, 16, 32, 64};
  bool sandwiched = false;
  bool emit_svg = false;
  int direction_count = 16;     // germ-sweep default
};

ExperimentSpec parse_spec(int argc, const char* const argv[]);

// RFC-4180 CSV with a header row.
void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
std::vector<std::vector<std::string>> parse_csv(std::istream& is);

// Minimal log-log scatter with the fitted line.
void write_loglog_svg(std::ostream& os, const std::vector<double>& x,
                      const std::vector<double>& y, double slope, double intercept);

struct ReproduceRow {
  std::string quantity;
  double measured = 0;
  double reference = 0;
  double tolerance = 0;
  std::string provenance;
  bool pass = false;
};

struct ReproduceReport {
  std::string example;
  std::vector<ReproduceRow> rows;
  bool pass() const;
};

// Full verification pipeline of one registry example.
ReproduceReport run_reproduce(const std::string& example_name);

// Execute a parsed spec; returns the process exit code (0 pass,
// 1 numerical-acceptance failure, 2 usage error).
int run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);

int cli_main(int argc, const char* const argv[]);

}  // namespace homog
