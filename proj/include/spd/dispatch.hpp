#pragma once

#include <string>
#include <vector>

#include "spd/flow_solver.hpp"
#include "spd/sp_forecast.hpp"
#include "spd/trip_model.hpp"

namespace spd {

struct RhcConfig {
  Seconds t_o = 600;  // optimization window
  Seconds t_r = 300;  // rolling step
  Seconds t_l = 480;  // locked window

  // Throws ConfigError unless t_o >= t_l >= t_r > 0.
  void validate() const;
  std::string label() const;  // "10-5-8" in minutes
  friend bool operator==(const RhcConfig&, const RhcConfig&) = default;
};

RhcConfig minutes(double t_o, double t_r, double t_l);

// Unit weighting uses no predictor; SinkProximity sets every internal weight
// to max(1, predicted SP).
struct Weighting {
  const Predictor* predictor = nullptr;

  static Weighting unit() { return {}; }
  static Weighting sink_proximity(const Predictor& p) { return {&p}; }
  bool uses_sp() const { return predictor != nullptr; }
};

struct DriverState {
  int driver_id = 0;
  Seconds free_time = 0;
  ZoneId location{};
  std::vector<int> route;  // committed instance order indices
};

struct IterationRecord {
  int iter = 0;
  Seconds t = 0;
  int window_orders = 0;
  int committed = 0;
  int expired = 0;
  int cum_served = 0;
  int cum_expired = 0;
  int pending = 0;     // revealed (pickup <= t + t_o) but unresolved
  int revealed = 0;    // orders with pickup <= t + t_o
  int due = 0;         // orders with pickup < t + t_r
  double cum_rsr = 0;  // cum_served / due
  double solve_ms = 0;
};

struct SimulationTrace {
  RhcConfig config;
  std::vector<IterationRecord> records;
  DispatchPlan plan;
  std::vector<DriverState> drivers;

  double final_rsr() const { return plan.rsr; }
  double mean_solve_ms() const;
};

struct RunOptions {
  // Wall-clock timing of every window solve; off keeps traces reproducible.
  bool record_timing = false;
};

// Full-horizon network with unit weights.
DispatchPlan solve_offline(const Instance& inst);

// Receding-horizon dispatch. Each iteration solves the window [t, t + t_o],
// commits route prefixes with pickup in [t, t + t_l], expires unserved
// orders with pickup < t + t_r, then advances t by t_r.
SimulationTrace run_rhc(const Instance& inst, const RhcConfig& cfg, const Weighting& weighting,
                        const RunOptions& opt = {});

// Cumulative-served ratio per iteration (1 when both are zero, +inf when only
// the base is zero). Throws ConfigError on mismatched iteration grids.
std::vector<double> rolling_rsr_ratio(const SimulationTrace& sp, const SimulationTrace& base);

// CSV "iter,t,window_orders,committed,expired,cum_rsr,solve_ms".
std::string trace_csv(const SimulationTrace& trace);

}  // namespace spd
