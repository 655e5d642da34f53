#include "spd/sink_prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spd/errors.hpp"
#include "spd/instance_io.hpp"

namespace spd {

SpResult longest_path_to_sink(const Dag& dag, Seconds t_sink) {
  const int n = dag.size();
  if (dag.sink < 0 || dag.sink >= n) throw ConfigError("sink is not a node of the graph");
  std::vector<int> indeg(static_cast<std::size_t>(n), 0);
  for (const auto& s : dag.succ) {
    for (const int w : s) {
      if (w < 0 || w >= n) throw ConfigError("edge to a non-existent node");
      ++indeg[static_cast<std::size_t>(w)];
    }
  }
  SpResult res;
  res.t_sink = t_sink;
  res.topo_order.reserve(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    if (indeg[static_cast<std::size_t>(v)] == 0) res.topo_order.push_back(v);
  }
  for (std::size_t head = 0; head < res.topo_order.size(); ++head) {
    for (const int w : dag.succ[static_cast<std::size_t>(res.topo_order[head])]) {
      if (--indeg[static_cast<std::size_t>(w)] == 0) res.topo_order.push_back(w);
    }
  }
  if (static_cast<int>(res.topo_order.size()) != n) {
    throw SolverError("graph has a cycle; sink proximity is undefined");
  }
  res.sp.assign(static_cast<std::size_t>(n), kNoSinkPath);
  res.sp[static_cast<std::size_t>(dag.sink)] = 0;
  for (auto it = res.topo_order.rbegin(); it != res.topo_order.rend(); ++it) {
    const int v = *it;
    if (v == dag.sink) continue;
    int best = kNoSinkPath;
    for (const int w : dag.succ[static_cast<std::size_t>(v)]) {
      const int s = res.sp[static_cast<std::size_t>(w)];
      if (s != kNoSinkPath) best = std::max(best, s + 1);
    }
    res.sp[static_cast<std::size_t>(v)] = best;
  }
  return res;
}

Dag project_orders(const ShareNet& net) {
  Dag dag;
  const int n_orders = static_cast<int>(net.orders.size());
  dag.succ.resize(static_cast<std::size_t>(n_orders) + 1);
  dag.sink = n_orders;
  const int first_origin = net.origin_of(0);
  const auto position = [&](int node) { return (node - first_origin) / 2; };
  for (const Link& l : net.links) {
    if (l.cls != LinkClass::Connectivity) continue;
    if (net.nodes[static_cast<std::size_t>(l.from)].kind != NodeKind::OrderDest) continue;
    dag.add_edge(position(l.from), position(l.to));
  }
  for (int p = 0; p < n_orders; ++p) dag.add_edge(p, dag.sink);
  return dag;
}

Seconds sink_time(const Instance& inst) {
  Seconds t = inst.horizon.end;
  for (const auto& o : inst.orders) t = std::max(t, o.dropoff_time);
  return t;
}

OrderSp compute_order_sp(const Instance& inst) {
  const ShareNet net = build_sharenet(inst);
  const Dag dag = project_orders(net);
  const SpResult res = longest_path_to_sink(dag, sink_time(inst));
  OrderSp out;
  out.t_sink = res.t_sink;
  out.sp.assign(inst.orders.size(), kNoSinkPath);
  for (std::size_t p = 0; p < net.orders.size(); ++p) {
    out.sp[static_cast<std::size_t>(net.orders[p])] = res.sp[p];
  }
  return out;
}

TsspResult standardize(std::span<const int> sp, std::span<const Order> orders, Seconds t_sink,
                       Seconds t_buffer) {
  if (sp.size() != orders.size()) throw ConfigError("one sink proximity per order is required");
  if (!(t_buffer >= 0)) throw ConfigError("buffer time must be nonnegative");
  TsspResult out;
  out.t_buffer = t_buffer;
  out.tssp.resize(orders.size());
  out.t_e.resize(orders.size());
  for (std::size_t i = 0; i < orders.size(); ++i) {
    const Seconds t_e = t_sink - orders[i].dropoff_time;
    out.t_e[i] = t_e;
    if (!(t_e + t_buffer > 0)) {
      throw DataError("order " + std::to_string(orders[i].id) +
                      " reaches the sink with no positive time budget");
    }
    out.tssp[i] = sp[i] == kNoSinkPath ? std::numeric_limits<double>::quiet_NaN()
                                       : static_cast<double>(sp[i]) / (t_e + t_buffer);
  }
  return out;
}

int destandardize(double tssp, Seconds t_e, Seconds t_buffer) {
  const double v = std::round(tssp * (t_e + t_buffer));
  if (!(v > 0)) return 0;
  return static_cast<int>(std::min(v, static_cast<double>(std::numeric_limits<int>::max())));
}

std::string sp_table_csv(std::span<const Order> orders, std::span<const int> sp,
                         const TsspResult& tssp) {
  std::ostringstream out;
  out << "order_id,sp,t_e,tssp\n";
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (sp[i] == kNoSinkPath) continue;
    out << orders[i].id << ',' << sp[i] << ',' << format_number(tssp.t_e[i]) << ','
        << format_number(tssp.tssp[i]) << '\n';
  }
  return out.str();
}

}  // namespace spd
