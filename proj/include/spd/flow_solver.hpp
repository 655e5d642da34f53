#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spd/share_net.hpp"

namespace spd {

struct FlowSolution {
  std::vector<std::uint8_t> flow;  // per link, 0 or 1
  int total_flow = 0;
  std::int64_t objective = 0;
};

struct Route {
  int driver_id = 0;
  // Instance order indices in service order.
  std::vector<int> orders;
};

struct DispatchPlan {
  std::vector<Route> routes;
  std::vector<std::uint8_t> served;  // per instance order index
  std::size_t served_count = 0;
  double rsr = 0;
};

// Maximum-reward integral flow with unit capacities and free total flow.
// Successive shortest paths on negated weights: potentials come from a DAG
// pass, then Dijkstra on reduced costs; augmentation stops when the best path
// no longer carries positive reward. Equal-cost paths resolve by fewer arcs,
// then smaller node index.
FlowSolution solve_maxcost(const ShareNet& net);

// Walks every unit of flow from the source to the sink. total_orders is the
// RSR denominator (N of the whole instance). Throws SolverError on an
// infeasible flow.
DispatchPlan recover_plan(const ShareNet& net, const FlowSolution& sol, std::size_t total_orders);

// Checks bounds and conservation; returns a description of the first
// violation, or an empty string.
std::string check_flow(const ShareNet& net, const FlowSolution& sol);

// Same edge list as export_edges with the flow appended as a sixth column.
std::string export_flow(const ShareNet& net, const Instance& inst, const FlowSolution& sol);

}  // namespace spd
