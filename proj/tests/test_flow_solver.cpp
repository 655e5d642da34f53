#include <gtest/gtest.h>

#include <set>

#include "spd/dispatch.hpp"
#include "spd/errors.hpp"
#include "spd/flow_solver.hpp"
#include "spd/rng.hpp"
#include "support/oracles.hpp"

using namespace spd;
using spd::ref::brute_force_oracle;
using spd::ref::line_instance;
using spd::ref::random_small_instance;

namespace {

Order order(int id, Seconds tp, Seconds td, int o, int d) {
  return {id, tp, td, ZoneId{o}, ZoneId{d}};
}

Instance chain_pair() {
  return line_instance(2, 0, 1, 1000, {order(0, 600, 1200, 1, 2), order(1, 1500, 2100, 2, 1)},
                       {{0, 0, ZoneId{1}}}, 3600);
}

void expect_plan_invariants(const Instance& inst, const DispatchPlan& plan) {
  std::set<int> seen;
  std::size_t served = 0;
  for (const Route& r : plan.routes) {
    const auto d = std::find_if(inst.drivers.begin(), inst.drivers.end(),
                                [&](const Driver& x) { return x.id == r.driver_id; });
    ASSERT_NE(d, inst.drivers.end());
    ASSERT_FALSE(r.orders.empty());
    EXPECT_TRUE(connectable_driver(*d, inst.orders[static_cast<std::size_t>(r.orders[0])],
                                   inst.travel, inst.idle_cap));
    for (std::size_t k = 0; k < r.orders.size(); ++k) {
      EXPECT_TRUE(seen.insert(r.orders[k]).second) << "order served twice";
      if (k) {
        EXPECT_TRUE(connectable_orders(inst.orders[static_cast<std::size_t>(r.orders[k - 1])],
                                       inst.orders[static_cast<std::size_t>(r.orders[k])],
                                       inst.travel, inst.idle_cap));
      }
    }
    served += r.orders.size();
  }
  EXPECT_EQ(served, plan.served_count);
  std::size_t flagged = 0;
  for (const auto f : plan.served) flagged += f;
  EXPECT_EQ(flagged, served);
  EXPECT_DOUBLE_EQ(plan.rsr, inst.orders.empty() ? 0.0 : double(served) / inst.orders.size());
}

// Feasible 0/1 flow made of random source-sink walks over unused links.
FlowSolution random_flow(const ShareNet& net, Rng& rng) {
  std::vector<std::vector<int>> out(net.nodes.size());
  for (std::size_t e = 0; e < net.links.size(); ++e) {
    out[static_cast<std::size_t>(net.links[e].from)].push_back(static_cast<int>(e));
  }
  FlowSolution sol;
  sol.flow.assign(net.links.size(), 0);
  for (int walk = 0; walk < 10; ++walk) {
    std::vector<int> path;
    int v = ShareNet::source();
    while (v != ShareNet::sink()) {
      std::vector<int> free;
      for (const int e : out[static_cast<std::size_t>(v)]) {
        if (!sol.flow[static_cast<std::size_t>(e)] &&
            std::find(path.begin(), path.end(), e) == path.end()) {
          free.push_back(e);
        }
      }
      if (free.empty()) break;
      const int e = free[rng.below(free.size())];
      path.push_back(e);
      v = net.links[static_cast<std::size_t>(e)].to;
    }
    if (v != ShareNet::sink()) continue;
    for (const int e : path) {
      sol.flow[static_cast<std::size_t>(e)] = 1;
      sol.objective += net.links[static_cast<std::size_t>(e)].weight;
    }
    ++sol.total_flow;
  }
  return sol;
}

}  // namespace

TEST(SolveMaxcost, TwoChainableOrdersOneDriver) {
  const Instance inst = chain_pair();
  const ShareNet net = build_sharenet(inst);
  const FlowSolution sol = solve_maxcost(net);
  EXPECT_EQ(sol.objective, 2);
  EXPECT_EQ(sol.total_flow, 1);
  EXPECT_EQ(check_flow(net, sol), "");
  const DispatchPlan plan = recover_plan(net, sol, inst.orders.size());
  EXPECT_DOUBLE_EQ(plan.rsr, 1.0);
  ASSERT_EQ(plan.routes.size(), 1u);
  EXPECT_EQ(plan.routes[0].orders, (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(brute_force_oracle(inst).best_rsr, 1.0);
}

TEST(SolveMaxcost, NoOrders) {
  const Instance inst = line_instance(2, 0, 1, 1000, {}, {{0, 0, ZoneId{1}}}, 3600);
  const ShareNet net = build_sharenet(inst);
  const FlowSolution sol = solve_maxcost(net);
  EXPECT_EQ(sol.objective, 0);
  EXPECT_EQ(sol.total_flow, 0);
  const DispatchPlan plan = recover_plan(net, sol, 0);
  EXPECT_TRUE(plan.routes.empty());
  EXPECT_EQ(plan.rsr, 0.0);
}

TEST(SolveMaxcost, ThreeUnchainableOrdersDeterministicTie) {
  // Pairwise overlapping in time, all reachable by the driver.
  const Instance inst = line_instance(
      2, 0, 1, 3600,
      {order(0, 100, 1000, 1, 1), order(1, 200, 1100, 1, 1), order(2, 300, 1200, 1, 1)},
      {{0, 0, ZoneId{1}}}, 3600);
  const ShareNet net = build_sharenet(inst);
  EXPECT_EQ(net.count(LinkClass::Connectivity), 3u);
  const FlowSolution sol = solve_maxcost(net);
  EXPECT_EQ(sol.objective, 1);
  const DispatchPlan plan = recover_plan(net, sol, 3);
  ASSERT_EQ(plan.routes.size(), 1u);
  // Equal reward and length: the path through the smallest node wins.
  EXPECT_EQ(plan.routes[0].orders, (std::vector<int>{0}));
  EXPECT_EQ(export_flow(net, inst, sol), export_flow(net, inst, solve_maxcost(net)));
  EXPECT_EQ(brute_force_oracle(inst).best_served, 1);
}

TEST(Oracle, OverlappingPairHalf) {
  const Instance inst =
      line_instance(2, 0, 1, 3600, {order(0, 100, 1000, 1, 1), order(1, 200, 1100, 1, 1)},
                    {{0, 0, ZoneId{1}}}, 3600);
  EXPECT_DOUBLE_EQ(brute_force_oracle(inst).best_rsr, 0.5);
  EXPECT_DOUBLE_EQ(solve_offline(inst).rsr, 0.5);
}

TEST(Oracle, NoDrivers) {
  const Instance inst = line_instance(2, 0, 1, 3600, {order(0, 100, 1000, 1, 1)}, {}, 3600);
  EXPECT_EQ(brute_force_oracle(inst).best_rsr, 0.0);
  EXPECT_EQ(solve_offline(inst).rsr, 0.0);
}

TEST(Oracle, RejectsLargeInstances) {
  EXPECT_THROW(brute_force_oracle(random_small_instance(1, {9, 1})), std::invalid_argument);
  EXPECT_THROW(brute_force_oracle(random_small_instance(1, {3, 4})), std::invalid_argument);
}

TEST(SolveMaxcost, MatchesBruteForceOn200Instances) {
  Rng rng(2024);
  for (int seed = 0; seed < 200; ++seed) {
    ref::SmallSpec spec;
    spec.orders = 1 + static_cast<int>(rng.below(8));
    spec.drivers = 1 + static_cast<int>(rng.below(3));
    const Instance inst = random_small_instance(static_cast<std::uint64_t>(seed), spec);
    const ShareNet net = build_sharenet(inst);
    const FlowSolution sol = solve_maxcost(net);
    ASSERT_EQ(check_flow(net, sol), "") << "seed " << seed;
    const DispatchPlan plan = recover_plan(net, sol, inst.orders.size());
    expect_plan_invariants(inst, plan);
    EXPECT_EQ(static_cast<int>(plan.served_count), brute_force_oracle(inst).best_served)
        << "seed " << seed;
    EXPECT_EQ(sol.objective, static_cast<std::int64_t>(plan.served_count));
  }
}

TEST(SolveMaxcost, IntegralAndConservative) {
  for (int seed = 0; seed < 40; ++seed) {
    const Instance inst = random_small_instance(300 + seed, {40, 6, 6, 7200, 1500, 5});
    std::vector<std::int64_t> w(inst.orders.size());
    Rng rng(seed);
    for (auto& x : w) x = 1 + static_cast<std::int64_t>(rng.below(12));
    NetOptions opt;
    opt.weights = w;
    const ShareNet net = build_sharenet(inst, opt);
    const FlowSolution sol = solve_maxcost(net);
    std::vector<int> balance(net.nodes.size(), 0);
    std::int64_t obj = 0;
    for (std::size_t e = 0; e < net.links.size(); ++e) {
      ASSERT_LE(sol.flow[e], 1);
      balance[static_cast<std::size_t>(net.links[e].from)] -= sol.flow[e];
      balance[static_cast<std::size_t>(net.links[e].to)] += sol.flow[e];
      obj += sol.flow[e] * net.links[e].weight;
    }
    for (std::size_t v = 2; v < balance.size(); ++v) EXPECT_EQ(balance[v], 0);
    EXPECT_EQ(balance[0], -sol.total_flow);
    EXPECT_EQ(balance[1], sol.total_flow);
    EXPECT_EQ(obj, sol.objective);
  }
}

TEST(SolveMaxcost, AddingConnectivityNeverHurts) {
  for (int seed = 0; seed < 40; ++seed) {
    const Instance inst = random_small_instance(700 + seed, {20, 3, 6, 5400, 900, 5});
    ShareNet net = build_sharenet(inst);
    const auto base = solve_maxcost(net).objective;
    // Time-forward link between two orders that were not connectable.
    Rng rng(seed);
    for (int tries = 0; tries < 50; ++tries) {
      const std::size_t a = rng.below(net.orders.size());
      const std::size_t b = rng.below(net.orders.size());
      const Order& oa = inst.orders[static_cast<std::size_t>(net.orders[a])];
      const Order& ob = inst.orders[static_cast<std::size_t>(net.orders[b])];
      if (ob.pickup_time <= oa.dropoff_time) continue;
      if (connectable_orders(oa, ob, inst.travel, inst.idle_cap)) continue;
      net.links.push_back({net.dest_of(a), net.origin_of(b), 1, 0, 0, LinkClass::Connectivity});
      break;
    }
    EXPECT_GE(solve_maxcost(net).objective, base);
  }
}

TEST(SolveMaxcost, PositiveScalingKeepsOptimum) {
  for (int seed = 0; seed < 30; ++seed) {
    const Instance inst = random_small_instance(900 + seed, {30, 4, 6, 5400, 1200, 5});
    const auto unit = solve_maxcost(build_sharenet(inst));
    for (const std::int64_t c : {2, 7}) {
      std::vector<std::int64_t> w(inst.orders.size(), c);
      NetOptions opt;
      opt.weights = w;
      const auto scaled = solve_maxcost(build_sharenet(inst, opt));
      EXPECT_EQ(scaled.objective, c * unit.objective);
      EXPECT_EQ(scaled.flow, unit.flow);
    }
  }
}

TEST(RecoverPlan, RandomFeasibleFlowsKeepInvariants) {
  Rng rng(5);
  for (int seed = 0; seed < 100; ++seed) {
    const Instance inst = random_small_instance(seed, {15, 3, 5, 3600, 1500, 5});
    const ShareNet net = build_sharenet(inst);
    const FlowSolution sol = random_flow(net, rng);
    ASSERT_EQ(check_flow(net, sol), "");
    expect_plan_invariants(inst, recover_plan(net, sol, inst.orders.size()));
  }
}

TEST(RecoverPlan, InconsistentFlowThrows) {
  const Instance inst = chain_pair();
  const ShareNet net = build_sharenet(inst);
  FlowSolution sol = solve_maxcost(net);
  sol.flow[0] = 0;  // source->driver
  EXPECT_NE(check_flow(net, sol), "");
  EXPECT_THROW(recover_plan(net, sol, 2), SolverError);
}
