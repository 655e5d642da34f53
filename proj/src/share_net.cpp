#include "spd/share_net.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "spd/errors.hpp"

namespace spd {

bool connectable_orders(const Order& i, const Order& j, const TravelModel& travel,
                        Seconds idle_cap) {
  const Seconds gap = j.pickup_time - i.dropoff_time;
  if (gap < 0 || gap > idle_cap) return false;
  return i.dropoff_time + travel.travel_time(i.destination, j.origin) <= j.pickup_time;
}

bool connectable_driver(const Driver& k, const Order& j, const TravelModel& travel,
                        Seconds idle_cap) {
  const Seconds gap = j.pickup_time - k.start_time;
  if (gap < 0 || gap > idle_cap) return false;
  return k.start_time + travel.travel_time(k.start_location, j.origin) <= j.pickup_time;
}

std::size_t ShareNet::count(LinkClass cls) const {
  return static_cast<std::size_t>(
      std::count_if(links.begin(), links.end(), [cls](const Link& l) { return l.cls == cls; }));
}

ShareNet build_sharenet(const Instance& inst, const NetOptions& opt) {
  ShareNet net;
  const auto& all_orders = inst.orders;
  if (!opt.weights.empty() && opt.weights.size() != all_orders.size()) {
    throw ConfigError("weights must cover every order");
  }
  if (!opt.eligible.empty() && opt.eligible.size() != all_orders.size()) {
    throw ConfigError("eligibility mask must cover every order");
  }

  const std::span<const Driver> drivers = opt.drivers ? *opt.drivers : std::span<const Driver>(inst.drivers);
  for (const auto& d : drivers) {
    if (!opt.window || d.start_time < opt.window->end) net.drivers.push_back(d);
  }
  net.origin_node.assign(all_orders.size(), -1);
  for (std::size_t i = 0; i < all_orders.size(); ++i) {
    if (!opt.eligible.empty() && !opt.eligible[i]) continue;
    if (opt.window && !opt.window->contains(all_orders[i].pickup_time)) continue;
    net.orders.push_back(static_cast<int>(i));
  }

  net.nodes.reserve(2 + net.drivers.size() + 2 * net.orders.size());
  net.nodes.push_back({NodeKind::Source, -1});
  net.nodes.push_back({NodeKind::Sink, -1});
  for (std::size_t k = 0; k < net.drivers.size(); ++k) {
    net.nodes.push_back({NodeKind::Driver, static_cast<int>(k)});
  }
  for (std::size_t p = 0; p < net.orders.size(); ++p) {
    net.origin_node[static_cast<std::size_t>(net.orders[p])] = net.origin_of(p);
    net.nodes.push_back({NodeKind::OrderOrigin, net.orders[p]});
    net.nodes.push_back({NodeKind::OrderDest, net.orders[p]});
  }

  // Orders in scope sorted by pickup, for range queries on the idle cap.
  std::vector<std::size_t> by_pickup(net.orders.size());
  std::iota(by_pickup.begin(), by_pickup.end(), 0);
  const auto order_at = [&](std::size_t pos) -> const Order& {
    return all_orders[static_cast<std::size_t>(net.orders[pos])];
  };
  std::stable_sort(by_pickup.begin(), by_pickup.end(), [&](std::size_t a, std::size_t b) {
    return order_at(a).pickup_time < order_at(b).pickup_time;
  });
  std::vector<Seconds> pickups(by_pickup.size());
  for (std::size_t r = 0; r < by_pickup.size(); ++r) pickups[r] = order_at(by_pickup[r]).pickup_time;
  const auto candidates = [&](Seconds from) {
    const auto lo = std::lower_bound(pickups.begin(), pickups.end(), from) - pickups.begin();
    const auto hi = std::upper_bound(pickups.begin(), pickups.end(), from + inst.idle_cap) -
                    pickups.begin();
    return std::pair{static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
  };

  auto& links = net.links;
  for (std::size_t k = 0; k < net.drivers.size(); ++k) {
    links.push_back({ShareNet::source(), net.driver_node(k), 1, 0, 0, LinkClass::Virtual});
  }
  for (std::size_t k = 0; k < net.drivers.size(); ++k) {
    const Driver& d = net.drivers[k];
    const auto [lo, hi] = candidates(d.start_time);
    for (std::size_t r = lo; r < hi; ++r) {
      const std::size_t p = by_pickup[r];
      if (connectable_driver(d, order_at(p), inst.travel, inst.idle_cap)) {
        links.push_back({net.driver_node(k), net.origin_of(p), 1, 0, 0, LinkClass::Connectivity});
      }
    }
  }
  for (std::size_t p = 0; p < net.orders.size(); ++p) {
    const Order& oi = order_at(p);
    const auto [lo, hi] = candidates(oi.dropoff_time);
    for (std::size_t r = lo; r < hi; ++r) {
      const std::size_t q = by_pickup[r];
      if (q != p && connectable_orders(oi, order_at(q), inst.travel, inst.idle_cap)) {
        links.push_back({net.dest_of(p), net.origin_of(q), 1, 0, 0, LinkClass::Connectivity});
      }
    }
  }
  for (std::size_t p = 0; p < net.orders.size(); ++p) {
    const std::int64_t w =
        opt.weights.empty() ? 1 : opt.weights[static_cast<std::size_t>(net.orders[p])];
    links.push_back({net.origin_of(p), net.dest_of(p), 1, 0, w, LinkClass::Internal});
  }
  for (std::size_t p = 0; p < net.orders.size(); ++p) {
    links.push_back({net.dest_of(p), ShareNet::sink(), 1, 0, 0, LinkClass::Virtual});
  }
  for (std::size_t k = 0; k < net.drivers.size(); ++k) {
    links.push_back({net.driver_node(k), ShareNet::sink(), 1, 0, 0, LinkClass::Virtual});
  }
  return net;
}

std::string node_label(const ShareNet& net, const Instance& inst, int node) {
  const NodeRef& n = net.nodes[static_cast<std::size_t>(node)];
  switch (n.kind) {
    case NodeKind::Source:
      return "source:0";
    case NodeKind::Sink:
      return "sink:0";
    case NodeKind::Driver:
      return "driver:" + std::to_string(net.drivers[static_cast<std::size_t>(n.index)].id);
    case NodeKind::OrderOrigin:
      return "origin:" + std::to_string(inst.orders[static_cast<std::size_t>(n.index)].id);
    case NodeKind::OrderDest:
      return "dest:" + std::to_string(inst.orders[static_cast<std::size_t>(n.index)].id);
  }
  return "?";
}

std::string export_edges(const ShareNet& net, const Instance& inst) {
  std::ostringstream out;
  for (const auto& l : net.links) {
    out << node_label(net, inst, l.from) << ',' << node_label(net, inst, l.to) << ','
        << int{l.upper} << ',' << int{l.lower} << ',' << l.weight << '\n';
  }
  return out.str();
}

}  // namespace spd
