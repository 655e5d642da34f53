#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "spd/dispatch.hpp"
#include "spd/errors.hpp"
#include "support/oracles.hpp"

using namespace spd;
using spd::ref::line_instance;
using spd::ref::random_small_instance;

namespace {

Order order(int id, Seconds tp, Seconds td, int o, int d) {
  return {id, tp, td, ZoneId{o}, ZoneId{d}};
}

const RhcConfig kCells[] = {minutes(10, 5, 8), minutes(20, 10, 20), minutes(30, 5, 15),
                            minutes(60, 30, 30)};

void expect_valid_routes(const Instance& inst, const SimulationTrace& tr) {
  std::set<int> seen;
  for (const DriverState& d : tr.drivers) {
    const auto start = std::find_if(inst.drivers.begin(), inst.drivers.end(),
                                    [&](const Driver& x) { return x.id == d.driver_id; });
    ASSERT_NE(start, inst.drivers.end());
    Driver cur = *start;
    for (const int i : d.route) {
      const Order& o = inst.orders[static_cast<std::size_t>(i)];
      EXPECT_TRUE(seen.insert(i).second);
      EXPECT_TRUE(connectable_driver(cur, o, inst.travel, inst.idle_cap));
      EXPECT_GE(o.dropoff_time, cur.start_time);
      cur = {cur.id, o.dropoff_time, o.destination};
    }
    EXPECT_EQ(d.free_time, cur.start_time);
    EXPECT_EQ(d.location, cur.start_location);
  }
}

}  // namespace

TEST(RhcConfigTest, Validation) {
  EXPECT_NO_THROW(minutes(10, 5, 8).validate());
  EXPECT_THROW(minutes(10, 5, 4).validate(), ConfigError);
  EXPECT_THROW(minutes(8, 5, 10).validate(), ConfigError);
  EXPECT_THROW(minutes(10, 0, 0).validate(), ConfigError);
  EXPECT_EQ(minutes(10, 5, 8).label(), "10-5-8");
  EXPECT_THROW(run_rhc(random_small_instance(1, {}), minutes(5, 10, 5), Weighting::unit()),
               ConfigError);
}

TEST(SolveOffline, ZeroDrivers) {
  Instance inst = random_small_instance(1, {});
  inst.drivers.clear();
  EXPECT_EQ(solve_offline(inst).rsr, 0.0);
}

TEST(SolveOffline, DuplicatedDriversNeverHurt) {
  for (int seed = 0; seed < 20; ++seed) {
    Instance inst = random_small_instance(seed, {30, 3, 6, 5400, 1200, 5});
    const double base = solve_offline(inst).rsr;
    const auto n = inst.drivers.size();
    for (std::size_t k = 0; k < n; ++k) {
      Driver d = inst.drivers[k];
      d.id = static_cast<int>(n + k);
      inst.drivers.push_back(d);
    }
    EXPECT_GE(solve_offline(inst).rsr, base);
  }
}

TEST(RunRhc, FullHorizonWindowEqualsOffline) {
  for (int seed = 0; seed < 20; ++seed) {
    const Instance inst = random_small_instance(seed, {40, 5, 6, 5400, 1200, 5});
    const Seconds h = inst.horizon.end - inst.horizon.begin;
    const auto tr = run_rhc(inst, {h, h, h}, Weighting::unit());
    EXPECT_EQ(tr.records.size(), 1u);
    EXPECT_EQ(tr.final_rsr(), solve_offline(inst).rsr);
  }
}

TEST(RunRhc, OfflineDominatesAndPlansAreValid) {
  for (int seed = 0; seed < 25; ++seed) {
    const Instance inst = random_small_instance(100 + seed, {60, 6, 6, 7200, 1200, 5});
    const double off = solve_offline(inst).rsr;
    const Predictor oracle = Predictor::oracle(inst);
    for (const auto& cfg : kCells) {
      for (const Weighting w : {Weighting::unit(), Weighting::sink_proximity(oracle)}) {
        const auto tr = run_rhc(inst, cfg, w);
        EXPECT_LE(tr.final_rsr(), off);
        expect_valid_routes(inst, tr);
        for (const auto& r : tr.records) {
          EXPECT_EQ(r.cum_served + r.cum_expired + r.pending, r.revealed);
          EXPECT_GE(r.pending, 0);
        }
        const auto& last = tr.records.back();
        EXPECT_EQ(last.cum_served + last.cum_expired, static_cast<int>(inst.orders.size()));
        EXPECT_EQ(static_cast<std::size_t>(last.cum_served), tr.plan.served_count);
        EXPECT_DOUBLE_EQ(last.cum_rsr, tr.final_rsr());
      }
    }
  }
}

TEST(RunRhc, ConstantPredictorMatchesUnit) {
  const Predictor c = Predictor::constant();
  for (int seed = 0; seed < 10; ++seed) {
    const Instance inst = random_small_instance(200 + seed, {60, 6, 6, 7200, 1200, 5});
    for (const auto& cfg : kCells) {
      EXPECT_EQ(trace_csv(run_rhc(inst, cfg, Weighting::unit())),
                trace_csv(run_rhc(inst, cfg, Weighting::sink_proximity(c))));
    }
  }
}

TEST(RunRhc, Deterministic) {
  const Instance inst = random_small_instance(5, {60, 6, 6, 7200, 1200, 5});
  const Predictor o = Predictor::oracle(inst);
  EXPECT_EQ(trace_csv(run_rhc(inst, kCells[0], Weighting::sink_proximity(o))),
            trace_csv(run_rhc(inst, kCells[0], Weighting::sink_proximity(o))));
}

TEST(RunRhc, LargerLookaheadAvoidsMyopicChoice) {
  // A long first order blocks two short later ones; only a window that
  // reveals the short pair skips the long one.
  const Instance inst = line_instance(
      2, 1000, 10, 3600,
      {order(0, 60, 3000, 1, 1), order(1, 400, 700, 1, 1), order(2, 800, 1100, 1, 1)},
      {{0, 0, ZoneId{1}}}, 3600);
  std::vector<double> rsr;
  for (const Seconds t_o : {300.0, 600.0, 1200.0, 2400.0}) {
    rsr.push_back(run_rhc(inst, {t_o, 300, 300}, Weighting::unit()).final_rsr());
  }
  for (std::size_t k = 1; k < rsr.size(); ++k) EXPECT_GE(rsr[k], rsr[k - 1]);
  EXPECT_DOUBLE_EQ(rsr.front(), 1.0 / 3);
  EXPECT_DOUBLE_EQ(rsr.back(), 2.0 / 3);
}

TEST(RunRhc, OrdersExpireWithoutSupply) {
  Instance inst = random_small_instance(3, {10, 1, 3, 3600, 1200, 5});
  inst.drivers.clear();
  const auto tr = run_rhc(inst, kCells[0], Weighting::unit());
  EXPECT_EQ(tr.final_rsr(), 0.0);
  EXPECT_EQ(tr.records.back().cum_expired, 10);
}

namespace {

SimulationTrace fixture_trace(const std::vector<int>& cum_served) {
  SimulationTrace tr;
  for (std::size_t k = 0; k < cum_served.size(); ++k) {
    IterationRecord r;
    r.iter = static_cast<int>(k);
    r.t = 300.0 * static_cast<double>(k);
    r.due = 10 * static_cast<int>(k + 1);
    r.cum_served = cum_served[k];
    tr.records.push_back(r);
  }
  return tr;
}

}  // namespace

TEST(RollingRatio, IdenticalIsOnes) {
  const auto a = fixture_trace({0, 2, 4, 6});
  EXPECT_EQ(rolling_rsr_ratio(a, a), std::vector<double>(4, 1.0));
}

TEST(RollingRatio, SpAheadFromIterationThree) {
  const auto base = fixture_trace({0, 3, 5, 5, 5, 5});
  const auto sp = fixture_trace({0, 3, 5, 6, 7, 8});
  const auto r = rolling_rsr_ratio(sp, base);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(r[k], 1.0);
  for (std::size_t k = 3; k < r.size(); ++k) EXPECT_GT(r[k], 1.0);
  EXPECT_DOUBLE_EQ(r.back(), 8.0 / 5.0);
}

TEST(RollingRatio, DipThenFinishAhead) {
  const auto r = rolling_rsr_ratio(fixture_trace({1, 3, 9}), fixture_trace({2, 4, 8}));
  EXPECT_LT(r[0], 1.0);
  EXPECT_LT(r[1], 1.0);
  EXPECT_GT(r[2], 1.0);
}

TEST(RollingRatio, Errors) {
  EXPECT_THROW(rolling_rsr_ratio(fixture_trace({1, 2}), fixture_trace({1})), ConfigError);
  auto b = fixture_trace({1, 2});
  b.records[1].t = 1;
  EXPECT_THROW(rolling_rsr_ratio(fixture_trace({1, 2}), b), ConfigError);
  EXPECT_TRUE(std::isinf(rolling_rsr_ratio(fixture_trace({1}), fixture_trace({0}))[0]));
}

TEST(TraceCsv, HeaderAndTimingOff) {
  const Instance inst = random_small_instance(5, {20, 3, 5, 3600, 1200, 5});
  const auto tr = run_rhc(inst, kCells[0], Weighting::unit());
  const std::string csv = trace_csv(tr);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "iter,t,window_orders,committed,expired,cum_rsr,solve_ms");
  for (const auto& r : tr.records) EXPECT_EQ(r.solve_ms, 0.0);
  RunOptions opt;
  opt.record_timing = true;
  const auto timed = run_rhc(inst, kCells[0], Weighting::unit(), opt);
  EXPECT_EQ(timed.plan.served, tr.plan.served);
}
