#include "spd/trip_model.hpp"

#include <cmath>
#include <string>

#include "spd/errors.hpp"

namespace spd {

namespace {
constexpr double kEarthRadiusM = 6371008.8;
constexpr double kDegToRad = M_PI / 180.0;
}  // namespace

ZoneTable::ZoneTable(std::vector<Zone> zones, std::optional<Eigen::MatrixXd> distance_m)
    : zones_(std::move(zones)) {
  index_.reserve(zones_.size());
  for (std::size_t i = 0; i < zones_.size(); ++i) {
    if (!index_.emplace(to_int(zones_[i].id), i).second) {
      throw DataError("duplicate zone id " + std::to_string(to_int(zones_[i].id)));
    }
  }
  if (distance_m) set_distance_matrix(std::move(*distance_m));
}

std::size_t ZoneTable::index_of(ZoneId id) const {
  const auto it = index_.find(to_int(id));
  if (it == index_.end()) throw DataError("unknown zone " + std::to_string(to_int(id)));
  return it->second;
}

void ZoneTable::set_distance_matrix(Eigen::MatrixXd distance_m) {
  const auto n = static_cast<Eigen::Index>(zones_.size());
  if (distance_m.rows() != n || distance_m.cols() != n) {
    throw DataError("distance matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (!distance_m.allFinite() || (distance_m.array() < 0).any()) {
    throw DataError("distance matrix has negative or non-finite entries");
  }
  if (distance_m.diagonal().cwiseAbs().maxCoeff() > 0) {
    throw DataError("distance matrix diagonal must be zero");
  }
  distance_m_ = std::move(distance_m);
}

double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  const double p1 = lat1 * kDegToRad;
  const double p2 = lat2 * kDegToRad;
  const double dp = (lat2 - lat1) * kDegToRad;
  const double dl = (lon2 - lon1) * kDegToRad;
  const double h = std::sin(dp / 2) * std::sin(dp / 2) +
                   std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

TravelModel::TravelModel(ZoneTable zones, double speed_mps)
    : zones_(std::move(zones)), speed_(speed_mps) {
  if (!(speed_ > 0) || !std::isfinite(speed_)) throw ConfigError("speed must be positive");
  const auto n = static_cast<Eigen::Index>(zones_.size());
  if (zones_.distance_matrix()) {
    source_ = DistanceSource::ExplicitMatrix;
    distance_ = *zones_.distance_matrix();
  } else {
    source_ = DistanceSource::CentroidHaversine;
    distance_.resize(n, n);
    const auto& z = zones_.zones();
    for (Eigen::Index i = 0; i < n; ++i) {
      distance_(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double d = haversine_m(z[i].lat, z[i].lon, z[j].lat, z[j].lon);
        distance_(i, j) = d;
        distance_(j, i) = d;
      }
    }
  }
  time_ = distance_ / speed_;
}

double TravelModel::distance_m(ZoneId a, ZoneId b) const {
  return distance_(static_cast<Eigen::Index>(zones_.index_of(a)),
                   static_cast<Eigen::Index>(zones_.index_of(b)));
}

void Instance::validate() const {
  if (!(idle_cap > 0)) throw DataError("idle cap must be positive");
  if (horizon.end < horizon.begin) throw DataError("horizon end precedes its start");
  const auto& zones = travel.zones();
  for (const auto& o : orders) {
    if (!(o.dropoff_time > o.pickup_time)) {
      throw DataError("order " + std::to_string(o.id) + " drops off before it picks up");
    }
    if (!zones.contains(o.origin) || !zones.contains(o.destination)) {
      throw DataError("order " + std::to_string(o.id) + " references an unknown zone");
    }
    if (!horizon.contains(o.pickup_time)) {
      throw DataError("order " + std::to_string(o.id) + " has pickup outside the horizon");
    }
  }
  for (const auto& d : drivers) {
    if (!zones.contains(d.start_location)) {
      throw DataError("driver " + std::to_string(d.id) + " starts in an unknown zone");
    }
  }
}

}  // namespace spd
