#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "spd/dispatch.hpp"

namespace spd {

// Predictor used for the SP-weighted runs of one scenario.
using PredictorFactory = std::function<Predictor(const Instance&)>;

struct GridSpec {
  std::vector<RhcConfig> cells;
  // One entry per paired seed / day.
  std::vector<Instance> scenarios;
  PredictorFactory predictor = [](const Instance&) { return Predictor::constant(); };
  bool include_offline = true;
  bool record_timing = false;
  int jobs = 1;

  void validate() const;
};

// Sixteen (t_o, t_r, t_l) cells in minutes, from 10-5-8 up to 60-30-40.
std::vector<RhcConfig> default_grid_cells();

struct CellResult {
  RhcConfig config;
  double rsr_base = 0;  // mean over scenarios
  double rsr_sp = 0;
  double offline_rsr = 0;  // NaN when offline was skipped
  double solve_ms_base = 0;
  double solve_ms_sp = 0;
  double improvement_pct = 0;  // from the two mean RSRs; NaN if rsr_base == 0
  std::vector<double> seed_rsr_base;
  std::vector<double> seed_rsr_sp;
  // Rolling series averaged over scenarios.
  std::vector<Seconds> t;
  std::vector<double> cum_rsr_base;
  std::vector<double> cum_rsr_sp;
  std::vector<double> ratio;
};

struct GridReport {
  std::vector<CellResult> cells;
  std::vector<double> offline_rsr;  // per scenario
  double mean_improvement_pct() const;
};

GridReport run_grid(const GridSpec& spec);

// "high" at >= 5 %, "mid" at >= 1 %, "low" below.
std::string improvement_bucket(double pct);

std::string grid_csv(const GridReport& report);
std::string rolling_csv(const CellResult& cell);
std::string rolling_svg(const GridReport& report);

// Writes grid.csv, rolling_<t_o>-<t_r>-<t_l>.csv per cell and rolling.svg.
void emit_report(const GridReport& report, const std::filesystem::path& dir);

}  // namespace spd
