#include "spd/flow_solver.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <sstream>
#include <tuple>

#include "spd/errors.hpp"

namespace spd {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

// Residual graph with arc 2e forward and 2e+1 backward for link e.
class Residual {
 public:
  explicit Residual(const ShareNet& net) : n_(static_cast<int>(net.nodes.size())) {
    const std::size_t m = net.links.size();
    head_.resize(2 * m);
    cap_.resize(2 * m);
    cost_.resize(2 * m);
    std::vector<int> degree(static_cast<std::size_t>(n_) + 1, 0);
    for (std::size_t e = 0; e < m; ++e) {
      const Link& l = net.links[e];
      head_[2 * e] = l.to;
      head_[2 * e + 1] = l.from;
      cap_[2 * e] = static_cast<std::int8_t>(l.upper - l.lower);
      cap_[2 * e + 1] = 0;
      cost_[2 * e] = -l.weight;
      cost_[2 * e + 1] = l.weight;
      ++degree[static_cast<std::size_t>(l.from) + 1];
      ++degree[static_cast<std::size_t>(l.to) + 1];
    }
    for (int v = 0; v < n_; ++v) degree[v + 1] += degree[v];
    offset_ = degree;
    arcs_.resize(2 * m);
    std::vector<int> fill(offset_.begin(), offset_.end() - 1);
    for (std::size_t e = 0; e < m; ++e) {
      const Link& l = net.links[e];
      arcs_[static_cast<std::size_t>(fill[l.from]++)] = static_cast<int>(2 * e);
      arcs_[static_cast<std::size_t>(fill[l.to]++)] = static_cast<int>(2 * e + 1);
    }
  }

  int nodes() const { return n_; }
  std::span<const int> out(int v) const {
    return {arcs_.data() + offset_[v], static_cast<std::size_t>(offset_[v + 1] - offset_[v])};
  }
  int head(int a) const { return head_[a]; }
  int tail(int a) const { return head_[a ^ 1]; }
  bool open(int a) const { return cap_[a] > 0; }
  std::int64_t cost(int a) const { return cost_[a]; }
  void push(int a) {
    --cap_[a];
    ++cap_[a ^ 1];
  }
  std::uint8_t flow_on_link(std::size_t e) const { return static_cast<std::uint8_t>(cap_[2 * e + 1]); }

 private:
  int n_;
  std::vector<int> head_;
  std::vector<std::int8_t> cap_;
  std::vector<std::int64_t> cost_;
  std::vector<int> offset_;
  std::vector<int> arcs_;
};

// Exact shortest distances from the source over forward arcs, by a
// topological pass. Unreachable nodes keep potential 0; they stay unreachable
// in every later residual graph.
std::vector<std::int64_t> dag_potentials(const ShareNet& net) {
  const std::size_t n = net.nodes.size();
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<int> indeg(n, 0);
  for (std::size_t e = 0; e < net.links.size(); ++e) {
    out[static_cast<std::size_t>(net.links[e].from)].push_back(e);
    ++indeg[static_cast<std::size_t>(net.links[e].to)];
  }
  std::vector<std::int64_t> dist(n, kInf);
  dist[ShareNet::source()] = 0;
  std::queue<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indeg[v] == 0) ready.push(v);
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    const std::size_t v = ready.front();
    ready.pop();
    ++seen;
    for (const std::size_t e : out[v]) {
      const Link& l = net.links[e];
      const auto w = static_cast<std::size_t>(l.to);
      if (dist[v] < kInf) dist[w] = std::min(dist[w], dist[v] - l.weight);
      if (--indeg[w] == 0) ready.push(w);
    }
  }
  if (seen != n) throw SolverError("shareability network contains a cycle");
  for (auto& d : dist) {
    if (d == kInf) d = 0;
  }
  return dist;
}

}  // namespace

FlowSolution solve_maxcost(const ShareNet& net) {
  Residual g(net);
  const int n = g.nodes();
  const int s = ShareNet::source();
  const int t = ShareNet::sink();
  std::vector<std::int64_t> pot = dag_potentials(net);
  std::vector<std::int64_t> dist(static_cast<std::size_t>(n));
  std::vector<int> hops(static_cast<std::size_t>(n));
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::vector<char> done(static_cast<std::size_t>(n));
  using Key = std::tuple<std::int64_t, int, int>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> heap;

  FlowSolution sol;
  while (true) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), 0);
    std::fill(parent.begin(), parent.end(), -1);
    dist[s] = 0;
    hops[s] = 0;
    heap = {};
    heap.emplace(0, 0, s);
    bool reached = false;
    while (!heap.empty()) {
      const auto [d, h, v] = heap.top();
      heap.pop();
      if (done[v]) continue;
      done[v] = 1;
      if (v == t) {
        reached = true;
        break;
      }
      for (const int a : g.out(v)) {
        if (!g.open(a)) continue;
        const int w = g.head(a);
        if (done[w]) continue;
        const std::int64_t nd = d + g.cost(a) + pot[v] - pot[w];
        const int nh = h + 1;
        if (nd < dist[w] || (nd == dist[w] && nh < hops[w])) {
          dist[w] = nd;
          hops[w] = nh;
          parent[w] = a;
          heap.emplace(nd, nh, w);
        }
      }
    }
    if (!reached) break;
    const std::int64_t reach = dist[t];
    const std::int64_t path_cost = reach + pot[t] - pot[s];
    if (path_cost >= 0) break;
    for (int v = t; v != s;) {
      const int a = parent[v];
      g.push(a);
      v = g.tail(a);
    }
    for (int v = 0; v < n; ++v) pot[v] += std::min(dist[v], reach);
    ++sol.total_flow;
  }

  sol.flow.resize(net.links.size());
  for (std::size_t e = 0; e < net.links.size(); ++e) {
    sol.flow[e] = g.flow_on_link(e);
    sol.objective += net.links[e].weight * sol.flow[e];
  }
  return sol;
}

std::string check_flow(const ShareNet& net, const FlowSolution& sol) {
  if (sol.flow.size() != net.links.size()) return "flow vector has wrong length";
  std::vector<int> balance(net.nodes.size(), 0);
  for (std::size_t e = 0; e < net.links.size(); ++e) {
    const Link& l = net.links[e];
    if (sol.flow[e] < l.lower || sol.flow[e] > l.upper) {
      return "link " + std::to_string(e) + " flow out of bounds";
    }
    balance[static_cast<std::size_t>(l.from)] += sol.flow[e];
    balance[static_cast<std::size_t>(l.to)] -= sol.flow[e];
  }
  for (std::size_t v = 2; v < balance.size(); ++v) {
    if (balance[v] != 0) return "conservation violated at node " + std::to_string(v);
  }
  if (balance[ShareNet::source()] != sol.total_flow || balance[ShareNet::sink()] != -sol.total_flow) {
    return "source/sink flow differs from total flow";
  }
  return {};
}

DispatchPlan recover_plan(const ShareNet& net, const FlowSolution& sol, std::size_t total_orders) {
  if (const auto err = check_flow(net, sol); !err.empty()) throw SolverError(err);
  // One outgoing flow link per node on a unit path.
  std::vector<int> next_link(net.nodes.size(), -1);
  for (std::size_t e = 0; e < net.links.size(); ++e) {
    if (!sol.flow[e]) continue;
    const Link& l = net.links[e];
    if (l.from == ShareNet::source()) continue;
    if (next_link[static_cast<std::size_t>(l.from)] != -1) {
      throw SolverError("node carries more than one unit of flow");
    }
    next_link[static_cast<std::size_t>(l.from)] = static_cast<int>(e);
  }

  DispatchPlan plan;
  plan.served.assign(total_orders, 0);
  for (std::size_t e = 0; e < net.links.size(); ++e) {
    const Link& l = net.links[e];
    if (!sol.flow[e] || l.from != ShareNet::source()) continue;
    const NodeRef& start = net.nodes[static_cast<std::size_t>(l.to)];
    if (start.kind != NodeKind::Driver) throw SolverError("source flow must enter a driver");
    Route route;
    route.driver_id = net.drivers[static_cast<std::size_t>(start.index)].id;
    int v = l.to;
    while (v != ShareNet::sink()) {
      const int le = next_link[static_cast<std::size_t>(v)];
      if (le < 0) throw SolverError("flow path stops before the sink");
      const int w = net.links[static_cast<std::size_t>(le)].to;
      const NodeRef& node = net.nodes[static_cast<std::size_t>(w)];
      if (node.kind == NodeKind::OrderOrigin) {
        route.orders.push_back(node.index);
        const auto idx = static_cast<std::size_t>(node.index);
        if (idx >= total_orders || plan.served[idx]) throw SolverError("order served twice");
        plan.served[idx] = 1;
      }
      v = w;
    }
    plan.served_count += route.orders.size();
    // A driver that goes straight to the sink stays idle.
    if (!route.orders.empty()) plan.routes.push_back(std::move(route));
  }
  plan.rsr = total_orders ? static_cast<double>(plan.served_count) / static_cast<double>(total_orders)
                          : 0.0;
  return plan;
}

std::string export_flow(const ShareNet& net, const Instance& inst, const FlowSolution& sol) {
  std::ostringstream out;
  for (std::size_t e = 0; e < net.links.size(); ++e) {
    const Link& l = net.links[e];
    out << node_label(net, inst, l.from) << ',' << node_label(net, inst, l.to) << ','
        << int{l.upper} << ',' << int{l.lower} << ',' << l.weight << ',' << int{sol.flow[e]} << '\n';
  }
  return out.str();
}

}  // namespace spd
