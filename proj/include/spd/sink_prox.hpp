#pragma once

#include <span>
#include <string>
#include <vector>

#include "spd/share_net.hpp"

namespace spd {

// Small adjacency-list DAG. Used for the order projection of a ShareNet and
// for hand-built graphs.
struct Dag {
  std::vector<std::vector<int>> succ;
  int sink = 0;
  // Optional node names, for CSV output of hand-built graphs.
  std::vector<std::string> names;

  int size() const { return static_cast<int>(succ.size()); }
  void add_edge(int from, int to) { succ[static_cast<std::size_t>(from)].push_back(to); }
};

inline constexpr int kNoSinkPath = -1;

struct SpResult {
  // Edge count of the longest path to the sink; kNoSinkPath when none exists.
  std::vector<int> sp;
  std::vector<int> topo_order;
  Seconds t_sink = 0;
};

// Longest path to the sink by a reverse topological sweep, O(V + E).
// Throws SolverError on a cycle.
SpResult longest_path_to_sink(const Dag& dag, Seconds t_sink = 0);

// Order nodes (one per order in scope, in ShareNet::orders order) with the
// order->order connectivity links, plus an edge from every order to a sink
// appended as the last node.
Dag project_orders(const ShareNet& net);

// SP per instance order index, from the full-horizon network.
struct OrderSp {
  std::vector<int> sp;
  Seconds t_sink = 0;
};
// t_sink is the end of the construction horizon, moved later if some
// drop-off happens after it.
Seconds sink_time(const Instance& inst);
OrderSp compute_order_sp(const Instance& inst);

struct TsspResult {
  std::vector<double> tssp;  // per order; NaN where sp has no sink path
  std::vector<Seconds> t_e;
  Seconds t_buffer = 0;
};

inline constexpr Seconds kDefaultBuffer = 20 * 60;

// tssp = sp / (t_e + t_buffer) with t_e = t_sink - t_d. Throws ConfigError for
// a negative buffer and DataError when t_e + t_buffer <= 0.
TsspResult standardize(std::span<const int> sp, std::span<const Order> orders, Seconds t_sink,
                       Seconds t_buffer);

// round(tssp * (t_e + t_buffer)), clamped at zero.
int destandardize(double tssp, Seconds t_e, Seconds t_buffer);

// CSV "order_id,sp,t_e,tssp".
std::string sp_table_csv(std::span<const Order> orders, std::span<const int> sp,
                         const TsspResult& tssp);

}  // namespace spd
