#include <algorithm>
#include <cmath>

#include "spd/errors.hpp"
#include "spd/rng.hpp"
#include "spd/trip_model.hpp"

namespace spd {

namespace {

constexpr double kMetersPerDegreeLat = 111320.0;

std::size_t sample_discrete(const std::vector<double>& cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                               cumulative.size() - 1);
}

std::vector<double> cumulate(const std::vector<double>& w) {
  std::vector<double> c(w.size());
  double acc = 0;
  for (std::size_t i = 0; i < w.size(); ++i) c[i] = (acc += w[i]);
  return c;
}

}  // namespace

int ScenarioParams::resolved_driver_count() const {
  if (driver_count) return *driver_count;
  return static_cast<int>(std::lround(driver_ratio * order_count));
}

double demand_intensity(const ScenarioParams& params, Seconds t) {
  double lambda = 1.0;
  for (const auto& p : params.peaks) {
    const double z = (t - p.center) / p.width;
    lambda += p.amplitude * std::exp(-0.5 * z * z);
  }
  return lambda;
}

Instance synth_scenario(std::uint64_t seed, const ScenarioParams& params) {
  const int n_drivers = params.resolved_driver_count();
  if (params.order_count <= 0) throw ConfigError("scenario needs at least one order");
  if (n_drivers <= 0) throw ConfigError("scenario needs at least one driver");
  if (params.grid_rows <= 0 || params.grid_cols <= 0) throw ConfigError("empty zone grid");
  if (!(params.horizon > 0)) throw ConfigError("scenario horizon must be positive");
  for (const auto& p : params.peaks) {
    if (!(p.width > 0) || p.amplitude < 0) throw ConfigError("bad demand peak");
  }

  Rng rng(seed);

  // Zone grid.
  std::vector<Zone> zones;
  std::vector<double> mass;
  const double lon_scale = kMetersPerDegreeLat * std::cos(params.origin_lat * M_PI / 180.0);
  for (int r = 0; r < params.grid_rows; ++r) {
    for (int c = 0; c < params.grid_cols; ++c) {
      Zone z;
      z.id = ZoneId{r * params.grid_cols + c + 1};
      z.lat = params.origin_lat + r * params.zone_spacing_m / kMetersPerDegreeLat;
      z.lon = params.origin_lon + c * params.zone_spacing_m / lon_scale;
      zones.push_back(z);
      double m = 1.0;
      for (const auto& h : params.hotspots) {
        const double d2 = (r - h.row) * (r - h.row) + (c - h.col) * (c - h.col);
        m += h.mass * std::exp(-0.5 * d2 / (h.radius * h.radius));
      }
      mass.push_back(m);
    }
  }

  Instance inst;
  inst.travel = TravelModel(ZoneTable(zones), params.speed);
  inst.idle_cap = params.idle_cap;
  inst.horizon = {0, params.horizon};
  inst.epoch_time_of_day = params.epoch_time_of_day;
  const auto& tt = inst.travel.travel_time_matrix();
  const auto n_zones = zones.size();

  // Pickup times by inverse CDF of the intensity on a one-second grid.
  const auto steps = static_cast<std::size_t>(std::ceil(params.horizon));
  std::vector<double> cdf(steps + 1, 0.0);
  for (std::size_t s = 0; s < steps; ++s) {
    const double a = static_cast<double>(s);
    const double b = std::min(a + 1.0, params.horizon);
    cdf[s + 1] = cdf[s] + 0.5 * (b - a) *
                              (demand_intensity(params, a) + demand_intensity(params, b));
  }
  std::vector<Seconds> pickups(static_cast<std::size_t>(params.order_count));
  for (auto& p : pickups) {
    const double u = rng.uniform() * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), steps);
    const std::size_t lo = hi - 1;
    const double frac = (u - cdf[lo]) / std::max(cdf[hi] - cdf[lo], 1e-300);
    p = std::min(params.horizon, std::floor(static_cast<double>(lo) + frac));
  }

  // Gravity OD field.
  const auto origin_cdf = cumulate(mass);
  std::vector<std::vector<double>> dest_cdf(n_zones);
  for (std::size_t o = 0; o < n_zones; ++o) {
    std::vector<double> w(n_zones);
    for (std::size_t d = 0; d < n_zones; ++d) {
      const double dist = inst.travel.travel_time_matrix()(static_cast<Eigen::Index>(o),
                                                           static_cast<Eigen::Index>(d)) *
                          params.speed;
      w[d] = mass[d] * std::exp(-dist / params.gravity_decay_m);
    }
    dest_cdf[o] = cumulate(w);
  }

  std::vector<Order> orders(pickups.size());
  for (std::size_t i = 0; i < orders.size(); ++i) {
    const std::size_t o = sample_discrete(origin_cdf, rng);
    const std::size_t d = sample_discrete(dest_cdf[o], rng);
    Order& ord = orders[i];
    ord.pickup_time = pickups[i];
    ord.origin = zones[o].id;
    ord.destination = zones[d].id;
    const double ride = std::max(params.min_trip, tt(static_cast<Eigen::Index>(o),
                                                     static_cast<Eigen::Index>(d)));
    ord.dropoff_time = ord.pickup_time + std::ceil(ride + params.boarding);
  }
  std::stable_sort(orders.begin(), orders.end(), [](const Order& a, const Order& b) {
    return a.pickup_time < b.pickup_time;
  });
  for (std::size_t i = 0; i < orders.size(); ++i) orders[i].id = static_cast<int>(i);

  std::vector<Driver> drivers(static_cast<std::size_t>(n_drivers));
  for (auto& d : drivers) {
    d.start_location = zones[sample_discrete(origin_cdf, rng)].id;
    d.start_time = std::floor(rng.uniform(0.0, std::min(params.driver_start_spread,
                                                        params.horizon)));
  }
  std::stable_sort(drivers.begin(), drivers.end(), [](const Driver& a, const Driver& b) {
    return a.start_time < b.start_time;
  });
  for (std::size_t i = 0; i < drivers.size(); ++i) drivers[i].id = static_cast<int>(i);

  inst.orders = std::move(orders);
  inst.drivers = std::move(drivers);
  return inst;
}

}  // namespace spd
