#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace spd {

// Seconds since the scenario epoch.
using Seconds = double;

enum class ZoneId : std::int32_t {};

inline constexpr std::int32_t to_int(ZoneId z) { return static_cast<std::int32_t>(z); }

struct Order {
  int id = 0;
  Seconds pickup_time = 0;
  Seconds dropoff_time = 0;
  ZoneId origin{};
  ZoneId destination{};

  friend bool operator==(const Order&, const Order&) = default;
};

struct Driver {
  int id = 0;
  Seconds start_time = 0;
  ZoneId start_location{};

  friend bool operator==(const Driver&, const Driver&) = default;
};

struct Zone {
  ZoneId id{};
  double lat = 0;  // degrees
  double lon = 0;  // degrees

  friend bool operator==(const Zone&, const Zone&) = default;
};

// Zone centroids plus an optional explicit distance matrix (meters), indexed
// in the same order as zones().
class ZoneTable {
 public:
  ZoneTable() = default;
  explicit ZoneTable(std::vector<Zone> zones,
                     std::optional<Eigen::MatrixXd> distance_m = std::nullopt);

  const std::vector<Zone>& zones() const { return zones_; }
  std::size_t size() const { return zones_.size(); }
  bool contains(ZoneId id) const { return index_.contains(to_int(id)); }
  // Throws DataError for an unknown zone.
  std::size_t index_of(ZoneId id) const;
  const Zone& zone(ZoneId id) const { return zones_[index_of(id)]; }
  const std::optional<Eigen::MatrixXd>& distance_matrix() const { return distance_m_; }

  void set_distance_matrix(Eigen::MatrixXd distance_m);

 private:
  std::vector<Zone> zones_;
  std::optional<Eigen::MatrixXd> distance_m_;
  std::unordered_map<std::int32_t, std::size_t> index_;
};

// Great-circle distance between two points on the mean-radius sphere.
double haversine_m(double lat1, double lon1, double lat2, double lon2);

enum class DistanceSource { CentroidHaversine, ExplicitMatrix };

inline constexpr double kDefaultSpeed = 6.7;  // m/s, about 24 km/h

// Zone-to-zone travel times at constant speed. Times are precomputed into a
// dense matrix at construction.
class TravelModel {
 public:
  TravelModel() = default;
  TravelModel(ZoneTable zones, double speed_mps);

  double speed() const { return speed_; }
  DistanceSource source() const { return source_; }
  const ZoneTable& zones() const { return zones_; }

  double distance_m(ZoneId a, ZoneId b) const;
  Seconds travel_time(ZoneId a, ZoneId b) const {
    return time_(static_cast<Eigen::Index>(zones_.index_of(a)),
                 static_cast<Eigen::Index>(zones_.index_of(b)));
  }
  const Eigen::MatrixXd& travel_time_matrix() const { return time_; }

 private:
  ZoneTable zones_;
  double speed_ = kDefaultSpeed;
  DistanceSource source_ = DistanceSource::CentroidHaversine;
  Eigen::MatrixXd distance_;
  Eigen::MatrixXd time_;
};

struct TimeWindow {
  Seconds begin = 0;
  Seconds end = 0;

  bool contains(Seconds t) const { return t >= begin && t <= end; }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

struct Instance {
  std::vector<Order> orders;
  std::vector<Driver> drivers;
  TravelModel travel;
  Seconds idle_cap = 1800;
  TimeWindow horizon;
  // Wall-clock time of day (seconds after midnight) at scenario time 0.
  Seconds epoch_time_of_day = 8 * 3600;

  // Throws DataError on a broken invariant.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Ingestion

// Naive local timestamp "YYYY-MM-DD HH:MM:SS" (or with 'T') to seconds since
// 1970-01-01 00:00 in the same local frame. Throws DataError.
std::int64_t parse_timestamp(const std::string& text);

struct IngestStats {
  std::size_t rows = 0;
  std::size_t kept = 0;
  std::size_t malformed = 0;
  std::size_t unknown_zone = 0;
  std::size_t bad_times = 0;
  std::size_t outside_window = 0;
};

struct IngestResult {
  std::vector<Order> orders;
  IngestStats stats;
  std::int64_t epoch = 0;  // absolute timestamp of scenario time 0
};

struct AbsoluteInterval {
  std::int64_t begin = 0;
  std::int64_t end = 0;
};

// Reads a trip CSV with columns pickup_datetime, dropoff_datetime, pu_zone,
// do_zone (extra columns ignored). Keeps trips whose pickup lies in
// [filter.begin, filter.end); times become seconds since filter.begin. Output
// is sorted by pickup time and renumbered from 0.
IngestResult ingest_trips(const std::filesystem::path& path, const ZoneTable& zones,
                          AbsoluteInterval filter);

ZoneTable load_zone_table(const std::filesystem::path& path);
// Square CSV: header row and first column hold zone ids, cells in meters.
Eigen::MatrixXd load_distance_matrix(const std::filesystem::path& path, const ZoneTable& zones);

// ---------------------------------------------------------------------------
// Synthetic scenarios

struct DemandPeak {
  Seconds center = 0;
  Seconds width = 0;     // standard deviation
  double amplitude = 0;  // relative to the base intensity of 1
};

struct Hotspot {
  double row = 0;
  double col = 0;
  double mass = 0;
  double radius = 1;  // in grid cells
};

struct ScenarioParams {
  int grid_rows = 8;
  int grid_cols = 8;
  double zone_spacing_m = 1500;
  double origin_lat = 40.7580;
  double origin_lon = -73.9855;
  Seconds horizon = 7200;
  int order_count = 2000;
  double driver_ratio = 0.2;
  // When set, overrides driver_ratio.
  std::optional<int> driver_count;
  // Drivers log on uniformly in [0, driver_start_spread].
  Seconds driver_start_spread = 1800;
  std::vector<DemandPeak> peaks = {{3600, 1500, 2.0}};
  std::vector<Hotspot> hotspots = {{2.0, 2.0, 12.0, 1.2}, {5.5, 5.0, 6.0, 1.0}};
  // Destination choice decays as exp(-distance / gravity_decay_m).
  double gravity_decay_m = 4000;
  Seconds min_trip = 240;
  Seconds boarding = 60;
  double speed = kDefaultSpeed;
  Seconds idle_cap = 1800;
  Seconds epoch_time_of_day = 8 * 3600;

  int resolved_driver_count() const;
};

// Pickup-time intensity (unnormalized) of the generator at time t.
double demand_intensity(const ScenarioParams& params, Seconds t);

// Deterministic in (seed, params). Throws ConfigError on zero orders/drivers.
Instance synth_scenario(std::uint64_t seed, const ScenarioParams& params = {});

}  // namespace spd
