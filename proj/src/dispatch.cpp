#include "spd/dispatch.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "spd/errors.hpp"
#include "spd/instance_io.hpp"

namespace spd {

void RhcConfig::validate() const {
  if (!(t_r > 0)) throw ConfigError("rolling window t_r must be positive");
  if (!(t_l >= t_r)) throw ConfigError("locked window t_l must be at least t_r");
  if (!(t_o >= t_l)) throw ConfigError("optimization window t_o must be at least t_l");
}

std::string RhcConfig::label() const {
  return format_number(t_o / 60) + "-" + format_number(t_r / 60) + "-" + format_number(t_l / 60);
}

RhcConfig minutes(double t_o, double t_r, double t_l) { return {t_o * 60, t_r * 60, t_l * 60}; }

double SimulationTrace::mean_solve_ms() const {
  if (records.empty()) return 0;
  double s = 0;
  for (const auto& r : records) s += r.solve_ms;
  return s / static_cast<double>(records.size());
}

DispatchPlan solve_offline(const Instance& inst) {
  const ShareNet net = build_sharenet(inst);
  return recover_plan(net, solve_maxcost(net), inst.orders.size());
}

namespace {

enum class Status : std::uint8_t { Pending, Served, Expired };

}  // namespace

SimulationTrace run_rhc(const Instance& inst, const RhcConfig& cfg, const Weighting& weighting,
                        const RunOptions& opt) {
  cfg.validate();
  const std::size_t n = inst.orders.size();
  SimulationTrace trace;
  trace.config = cfg;

  std::vector<std::size_t> by_pickup(n);
  std::iota(by_pickup.begin(), by_pickup.end(), 0);
  std::stable_sort(by_pickup.begin(), by_pickup.end(), [&](std::size_t a, std::size_t b) {
    return inst.orders[a].pickup_time < inst.orders[b].pickup_time;
  });
  std::vector<Seconds> pickups(n);
  for (std::size_t r = 0; r < n; ++r) pickups[r] = inst.orders[by_pickup[r]].pickup_time;
  const auto count_le = [&](Seconds t) {
    return static_cast<int>(std::upper_bound(pickups.begin(), pickups.end(), t) - pickups.begin());
  };
  const auto count_lt = [&](Seconds t) {
    return static_cast<int>(std::lower_bound(pickups.begin(), pickups.end(), t) - pickups.begin());
  };

  std::vector<Status> status(n, Status::Pending);
  std::vector<std::uint8_t> eligible(n, 0);
  std::vector<std::int64_t> weights(n, 1);
  const Seconds t_sink = weighting.uses_sp() ? sink_time(inst) : 0;

  trace.drivers.reserve(inst.drivers.size());
  for (const auto& d : inst.drivers) trace.drivers.push_back({d.id, d.start_time, d.start_location, {}});
  std::vector<Driver> available(inst.drivers.size());
  std::unordered_map<int, std::size_t> driver_pos;
  for (std::size_t k = 0; k < inst.drivers.size(); ++k) {
    if (!driver_pos.emplace(inst.drivers[k].id, k).second) throw DataError("duplicate driver id");
  }

  int cum_served = 0;
  int cum_expired = 0;
  std::size_t expire_cursor = 0;  // orders before this rank are resolved
  int iter = 0;
  Seconds t = inst.horizon.begin;
  do {
    const TimeWindow window{t, t + cfg.t_o};
    const auto lo = static_cast<std::size_t>(count_lt(window.begin));
    const auto hi = static_cast<std::size_t>(count_le(window.end));
    std::vector<int> in_window;
    for (std::size_t r = lo; r < hi; ++r) {
      const std::size_t i = by_pickup[r];
      if (status[i] == Status::Pending) {
        eligible[i] = 1;
        in_window.push_back(static_cast<int>(i));
      }
    }
    if (weighting.uses_sp()) {
      const auto sp = weighting.predictor->predict_sp(inst, in_window, t_sink);
      for (std::size_t k = 0; k < in_window.size(); ++k) {
        weights[static_cast<std::size_t>(in_window[k])] = std::max(1, sp[k]);
      }
    }
    for (std::size_t k = 0; k < trace.drivers.size(); ++k) {
      const auto& s = trace.drivers[k];
      available[k] = {s.driver_id, s.free_time, s.location};
    }

    const auto started = std::chrono::steady_clock::now();
    NetOptions netopt;
    netopt.window = window;
    netopt.weights = weights;
    netopt.drivers = std::span<const Driver>(available);
    netopt.eligible = eligible;
    const ShareNet net = build_sharenet(inst, netopt);
    const FlowSolution sol = solve_maxcost(net);
    const DispatchPlan plan = recover_plan(net, sol, n);
    const auto elapsed = std::chrono::steady_clock::now() - started;
    for (const int i : in_window) eligible[static_cast<std::size_t>(i)] = 0;

    IterationRecord rec;
    rec.iter = iter;
    rec.t = t;
    rec.window_orders = static_cast<int>(in_window.size());
    const Seconds lock_end = t + cfg.t_l;
    for (const Route& route : plan.routes) {
      auto& state = trace.drivers[driver_pos.at(route.driver_id)];
      for (const int i : route.orders) {
        const Order& o = inst.orders[static_cast<std::size_t>(i)];
        if (o.pickup_time > lock_end) break;
        status[static_cast<std::size_t>(i)] = Status::Served;
        state.route.push_back(i);
        state.free_time = o.dropoff_time;
        state.location = o.destination;
        ++rec.committed;
      }
    }
    const auto due_rank = static_cast<std::size_t>(count_lt(t + cfg.t_r));
    for (; expire_cursor < due_rank; ++expire_cursor) {
      const std::size_t i = by_pickup[expire_cursor];
      if (status[i] == Status::Pending) {
        status[i] = Status::Expired;
        ++rec.expired;
      }
    }
    cum_served += rec.committed;
    cum_expired += rec.expired;
    rec.cum_served = cum_served;
    rec.cum_expired = cum_expired;
    rec.revealed = static_cast<int>(hi);
    rec.due = static_cast<int>(due_rank);
    rec.pending = rec.revealed - cum_served - cum_expired;
    if (opt.record_timing) {
      rec.solve_ms = std::chrono::duration<double, std::milli>(elapsed).count();
    }
    trace.records.push_back(rec);
    ++iter;
    t += cfg.t_r;
  } while (t < inst.horizon.end);

  // Whatever the rolling front never passed (pickup exactly at the horizon
  // end) is unserved as well.
  auto& last = trace.records.back();
  for (; expire_cursor < n; ++expire_cursor) {
    const std::size_t i = by_pickup[expire_cursor];
    if (status[i] == Status::Pending) {
      status[i] = Status::Expired;
      ++last.expired;
      ++cum_expired;
    }
  }
  last.cum_expired = cum_expired;
  last.due = static_cast<int>(n);
  last.revealed = std::max(last.revealed, static_cast<int>(n));
  last.pending = last.revealed - last.cum_served - last.cum_expired;
  for (auto& r : trace.records) {
    r.cum_rsr = r.due > 0 ? static_cast<double>(r.cum_served) / r.due : 0.0;
  }

  trace.plan.served.assign(n, 0);
  for (const auto& d : trace.drivers) {
    if (d.route.empty()) continue;
    trace.plan.routes.push_back({d.driver_id, d.route});
    for (const int i : d.route) trace.plan.served[static_cast<std::size_t>(i)] = 1;
    trace.plan.served_count += d.route.size();
  }
  trace.plan.rsr = n ? static_cast<double>(trace.plan.served_count) / static_cast<double>(n) : 0.0;
  return trace;
}

std::vector<double> rolling_rsr_ratio(const SimulationTrace& sp, const SimulationTrace& base) {
  if (sp.records.size() != base.records.size()) {
    throw ConfigError("traces have different iteration counts");
  }
  std::vector<double> out;
  out.reserve(sp.records.size());
  for (std::size_t k = 0; k < sp.records.size(); ++k) {
    const auto& a = sp.records[k];
    const auto& b = base.records[k];
    if (a.t != b.t || a.due != b.due) throw ConfigError("traces have different iteration grids");
    if (a.cum_served == 0 && b.cum_served == 0) {
      out.push_back(1.0);
    } else if (b.cum_served == 0) {
      out.push_back(std::numeric_limits<double>::infinity());
    } else {
      out.push_back(static_cast<double>(a.cum_served) / b.cum_served);
    }
  }
  return out;
}

std::string trace_csv(const SimulationTrace& trace) {
  std::ostringstream out;
  out << "iter,t,window_orders,committed,expired,cum_rsr,solve_ms\n";
  char buf[64];
  for (const auto& r : trace.records) {
    std::snprintf(buf, sizeof buf, "%.6f", r.cum_rsr);
    out << r.iter << ',' << format_number(r.t) << ',' << r.window_orders << ',' << r.committed
        << ',' << r.expired << ',' << buf << ',';
    std::snprintf(buf, sizeof buf, "%.3f", r.solve_ms);
    out << buf << '\n';
  }
  return out.str();
}

}  // namespace spd
