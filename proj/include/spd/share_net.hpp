#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spd/trip_model.hpp"

namespace spd {

enum class NodeKind : std::uint8_t { Source, Sink, Driver, OrderOrigin, OrderDest };

struct NodeRef {
  NodeKind kind = NodeKind::Source;
  // Index into Instance::orders or the driver list the network was built
  // from; -1 for Source and Sink.
  int index = -1;

  friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

enum class LinkClass : std::uint8_t { Virtual, Connectivity, Internal };

struct Link {
  int from = 0;
  int to = 0;
  std::uint8_t upper = 1;
  std::uint8_t lower = 0;
  std::int64_t weight = 0;
  LinkClass cls = LinkClass::Virtual;
};

// Extended shareability network. Node 0 is the source and node 1 the sink,
// followed by one node per driver and two per order (origin, destination).
// Links are stored in construction order: source->driver, driver->order,
// order->order, internal, order->sink, driver->sink.
struct ShareNet {
  std::vector<NodeRef> nodes;
  std::vector<Link> links;
  // Instance order indices in scope, and driver records in scope.
  std::vector<int> orders;
  std::vector<Driver> drivers;
  // Instance order index -> origin node (-1 when out of scope).
  std::vector<int> origin_node;

  static constexpr int source() { return 0; }
  static constexpr int sink() { return 1; }
  int driver_node(std::size_t k) const { return 2 + static_cast<int>(k); }
  int origin_of(std::size_t pos) const {
    return 2 + static_cast<int>(drivers.size()) + 2 * static_cast<int>(pos);
  }
  int dest_of(std::size_t pos) const { return origin_of(pos) + 1; }

  std::size_t count(LinkClass cls) const;
};

// t_i^d + travel(d_i, o_j) <= t_j^p and t_j^p - t_i^d <= idle_cap.
bool connectable_orders(const Order& i, const Order& j, const TravelModel& travel,
                        Seconds idle_cap);
// t_k^r + travel(p_k, o_j) <= t_j^p and t_j^p - t_k^r <= idle_cap.
bool connectable_driver(const Driver& k, const Order& j, const TravelModel& travel,
                        Seconds idle_cap);

struct NetOptions {
  // Restrict to orders with pickup in the window and drivers whose start
  // (free) time precedes the window end.
  std::optional<TimeWindow> window;
  // Internal-link weight per instance order index; empty means unit weights.
  std::span<const std::int64_t> weights;
  // Replaces Instance::drivers (used for rolling driver states).
  std::optional<std::span<const Driver>> drivers;
  // Per instance order index; when non-empty, orders with a zero entry are
  // left out.
  std::span<const std::uint8_t> eligible;
};

ShareNet build_sharenet(const Instance& inst, const NetOptions& opt = {});

// Debug edge list: one "from_kind:id,to_kind:id,u,l,w" line per link.
std::string node_label(const ShareNet& net, const Instance& inst, int node);
std::string export_edges(const ShareNet& net, const Instance& inst);

}  // namespace spd
