#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "spd/errors.hpp"
#include "spd/instance_io.hpp"
#include "spd/rng.hpp"
#include "spd/trip_model.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace spd;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "spd_tests" / name;
  fs::create_directories(p.parent_path());
  return p;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

ZoneTable two_zones() {
  return ZoneTable({{ZoneId{43}, 40.7829, -73.9654}, {ZoneId{161}, 40.7580, -73.9777}});
}

}  // namespace

TEST(TravelModel, SameZoneIsZero) {
  TravelModel tm(two_zones(), 6.7);
  EXPECT_EQ(tm.travel_time(ZoneId{43}, ZoneId{43}), 0.0);
}

TEST(TravelModel, KilometerAtFiveMetersPerSecond) {
  // Two points on a meridian 1 km apart.
  const double dlat = 1000.0 / 6371008.8 * 180.0 / M_PI;
  TravelModel tm(ZoneTable({{ZoneId{1}, 40.0, -74.0}, {ZoneId{2}, 40.0 + dlat, -74.0}}), 5.0);
  EXPECT_NEAR(tm.travel_time(ZoneId{1}, ZoneId{2}), 200.0, 1e-6);
  EXPECT_EQ(tm.travel_time(ZoneId{1}, ZoneId{2}), tm.travel_time(ZoneId{2}, ZoneId{1}));
}

TEST(TravelModel, MatrixLookupEqualsEntryOverSpeed) {
  Rng rng(7);
  const int n = 6;
  std::vector<Zone> zones;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    zones.push_back({ZoneId{10 + a}, 40 + 0.01 * a, -74});
    for (int b = 0; b < n; ++b) {
      if (a != b) m(a, b) = std::floor(rng.uniform(100, 5000));
    }
  }
  const double v = 7.5;
  TravelModel tm(ZoneTable(zones, m), v);
  EXPECT_EQ(tm.source(), DistanceSource::ExplicitMatrix);
  for (int k = 0; k < 5; ++k) {
    const int a = static_cast<int>(rng.below(n));
    const int b = static_cast<int>(rng.below(n));
    EXPECT_DOUBLE_EQ(tm.travel_time(ZoneId{10 + a}, ZoneId{10 + b}), m(a, b) / v);
  }
}

TEST(TravelModel, UnknownZoneThrows) {
  TravelModel tm(two_zones(), 6.7);
  EXPECT_THROW(tm.travel_time(ZoneId{43}, ZoneId{999}), DataError);
}

TEST(TravelModel, HaversineTriangleInequality) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Zone> zs;
    for (int k = 0; k < 3; ++k) {
      zs.push_back({ZoneId{k}, rng.uniform(40.5, 40.9), rng.uniform(-74.2, -73.7)});
    }
    TravelModel tm(ZoneTable(zs), 6.7);
    const ZoneId a{0}, b{1}, c{2};
    EXPECT_LE(tm.travel_time(a, c), tm.travel_time(a, b) + tm.travel_time(b, c) + 1e-9);
  }
}

TEST(ZoneTableTest, RejectsBadMatrix) {
  std::vector<Zone> zs{{ZoneId{1}, 0, 0}, {ZoneId{2}, 0, 0}};
  Eigen::MatrixXd neg(2, 2);
  neg << 0, -1, 1, 0;
  EXPECT_THROW(ZoneTable(zs, neg), DataError);
  Eigen::MatrixXd diag(2, 2);
  diag << 1, 1, 1, 0;
  EXPECT_THROW(ZoneTable(zs, diag), DataError);
  EXPECT_THROW(ZoneTable(zs, Eigen::MatrixXd::Zero(3, 3)), DataError);
  std::vector<Zone> dup{{ZoneId{1}, 0, 0}, {ZoneId{1}, 1, 1}};
  EXPECT_THROW(ZoneTable{dup}, DataError);
}

// --- ingestion ---------------------------------------------------------------

TEST(Ingest, ConvertsToEpochSeconds) {
  const auto p = scratch("trips_basic.csv");
  write(p,
        "pickup_datetime,dropoff_datetime,pu_zone,do_zone\n"
        "2022-06-01 08:00:00,2022-06-01 08:20:00,43,161\n");
  AbsoluteInterval win{parse_timestamp("2022-06-01 08:00:00"),
                       parse_timestamp("2022-06-01 10:00:00")};
  const auto res = ingest_trips(p, two_zones(), win);
  ASSERT_EQ(res.orders.size(), 1u);
  const Order& o = res.orders[0];
  EXPECT_EQ(o.id, 0);
  EXPECT_EQ(o.pickup_time, 0);
  EXPECT_EQ(o.dropoff_time, 1200);
  EXPECT_EQ(o.origin, ZoneId{43});
  EXPECT_EQ(o.destination, ZoneId{161});
}

TEST(Ingest, DropsAndCountsBadRows) {
  const auto p = scratch("trips_dirty.csv");
  write(p,
        "vendor,pickup_datetime,dropoff_datetime,pu_zone,do_zone\n"
        "1,2022-06-01 08:05:00,2022-06-01 08:05:00,43,161\n"   // dropoff == pickup
        "1,2022-06-01 08:06:00,2022-06-01 08:01:00,43,161\n"   // dropoff < pickup
        "1,2022-06-01 08:07:00,2022-06-01 08:17:00,43,999\n"   // unknown zone
        "1,not a time,2022-06-01 08:17:00,43,161\n"            // malformed
        "1,2022-06-01 08:09:00\n"                              // short row
        "1,2022-06-01 11:00:00,2022-06-01 11:10:00,43,161\n"   // outside window
        "1,2022-06-01T08:30,2022-06-01T08:45,161,43\n");
  AbsoluteInterval win{parse_timestamp("2022-06-01 08:00:00"),
                       parse_timestamp("2022-06-01 10:00:00")};
  const auto res = ingest_trips(p, two_zones(), win);
  EXPECT_EQ(res.stats.rows, 7u);
  EXPECT_EQ(res.stats.kept, 1u);
  EXPECT_EQ(res.stats.bad_times, 2u);
  EXPECT_EQ(res.stats.unknown_zone, 1u);
  EXPECT_EQ(res.stats.malformed, 2u);
  EXPECT_EQ(res.stats.outside_window, 1u);
  ASSERT_EQ(res.orders.size(), 1u);
  EXPECT_EQ(res.orders[0].pickup_time, 1800);
}

TEST(Ingest, MissingColumnNamesIt) {
  const auto p = scratch("trips_nocol.csv");
  write(p, "pickup_datetime,dropoff_datetime,pu_zone\n2022-06-01 08:00:00,2022-06-01 08:20:00,43\n");
  try {
    ingest_trips(p, two_zones(), {0, 1});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("do_zone"), std::string::npos);
  }
}

TEST(Ingest, MissingFileAndEmptyResultThrow) {
  EXPECT_THROW(ingest_trips(scratch("nope.csv"), two_zones(), {0, 1}), DataError);
  const auto p = scratch("trips_empty.csv");
  write(p, "pickup_datetime,dropoff_datetime,pu_zone,do_zone\n");
  EXPECT_THROW(ingest_trips(p, two_zones(), {0, 1}), DataError);
}

TEST(Ingest, FuzzedRowsKeepInvariants) {
  Rng rng(3);
  std::string text = "pickup_datetime,dropoff_datetime,pu_zone,do_zone\n";
  const char* junk[] = {"", "x", "43", "2022-06-01 08:", "2022-13-01 08:00:00", "-5", ",,"};
  for (int r = 0; r < 500; ++r) {
    const auto field = [&](int kind) -> std::string {
      if (rng.uniform() < 0.15) return junk[rng.below(7)];
      if (kind < 2) {
        char buf[32];
        const int minute = static_cast<int>(rng.below(180));
        std::snprintf(buf, sizeof buf, "2022-06-01 %02d:%02d:%02d", 7 + minute / 60, minute % 60,
                      static_cast<int>(rng.below(60)));
        return buf;
      }
      return rng.uniform() < 0.5 ? "43" : (rng.uniform() < 0.9 ? "161" : "7");
    };
    text += field(0) + "," + field(1) + "," + field(2) + "," + field(3) + "\n";
  }
  const auto p = scratch("trips_fuzz.csv");
  write(p, text);
  AbsoluteInterval win{parse_timestamp("2022-06-01 08:00:00"),
                       parse_timestamp("2022-06-01 09:30:00")};
  const auto table = two_zones();
  const auto res = ingest_trips(p, table, win);
  const auto& s = res.stats;
  EXPECT_EQ(s.rows, 500u);
  EXPECT_EQ(s.kept + s.malformed + s.unknown_zone + s.bad_times + s.outside_window, s.rows);
  for (std::size_t i = 0; i < res.orders.size(); ++i) {
    const Order& o = res.orders[i];
    EXPECT_EQ(o.id, static_cast<int>(i));
    EXPECT_GT(o.dropoff_time, o.pickup_time);
    EXPECT_GE(o.pickup_time, 0);
    EXPECT_LT(o.pickup_time, 5400);
    EXPECT_TRUE(table.contains(o.origin));
    EXPECT_TRUE(table.contains(o.destination));
    if (i) {
      EXPECT_LE(res.orders[i - 1].pickup_time, o.pickup_time);
    }
  }
  // Same file, same result.
  const auto again = ingest_trips(p, table, win);
  EXPECT_EQ(again.orders, res.orders);
}

TEST(Ingest, ZoneAndMatrixFiles) {
  const auto zp = scratch("zones.csv");
  write(zp, "zone_id,lat,lon\n1,40.70,-74.00\n2,40.71,-74.00\n3,40.72,-74.01\n");
  const ZoneTable table = load_zone_table(zp);
  ASSERT_EQ(table.size(), 3u);
  const auto mp = scratch("matrix.csv");
  write(mp, ",3,1,2\n3,0,500,700\n1,500,0,300\n2,700,300,0\n");
  const Eigen::MatrixXd m = load_distance_matrix(mp, table);
  // Reordered to the zone table order 1,2,3.
  EXPECT_EQ(m(0, 1), 300);
  EXPECT_EQ(m(0, 2), 500);
  EXPECT_EQ(m(1, 2), 700);
}

// --- synthetic scenarios -------------------------------------------------------

TEST(Synth, DeterministicBytes) {
  ScenarioParams p;
  p.order_count = 300;
  EXPECT_EQ(instance_to_json(synth_scenario(5, p)), instance_to_json(synth_scenario(5, p)));
  EXPECT_NE(instance_to_json(synth_scenario(5, p)), instance_to_json(synth_scenario(6, p)));
}

TEST(Synth, DriverRatio) {
  ScenarioParams p;
  p.order_count = 1000;
  p.driver_ratio = 0.2;
  const Instance inst = synth_scenario(1, p);
  EXPECT_EQ(inst.orders.size(), 1000u);
  EXPECT_EQ(inst.drivers.size(), 200u);
  inst.validate();
}

TEST(Synth, ZeroOrdersOrDriversRejected) {
  ScenarioParams p;
  p.order_count = 0;
  EXPECT_THROW(synth_scenario(1, p), ConfigError);
  p.order_count = 10;
  p.driver_count = 0;
  EXPECT_THROW(synth_scenario(1, p), ConfigError);
}

TEST(Synth, PickupHistogramMatchesIntensity) {
  // Chi-square goodness of fit at 5 % on 10k orders, repeated over 20 seeds.
  // Under the sampling law the rejection count is Binomial(20, 0.05);
  // P(count >= 5) is about 1.6 %.
  ScenarioParams p;
  p.order_count = 10000;
  const int bins = 24;
  std::vector<double> edges;
  for (int b = 0; b <= bins; ++b) edges.push_back(p.horizon * b / bins);
  const auto mass = ref::intensity_bin_mass(p, edges);
  int rejections = 0;
  double mean_chi2 = 0;
  for (int seed = 0; seed < 20; ++seed) {
    const Instance inst = synth_scenario(2024 + seed, p);
    std::vector<int> counts(bins, 0);
    for (const auto& o : inst.orders) {
      const int b = std::min(bins - 1, static_cast<int>(o.pickup_time / (p.horizon / bins)));
      ++counts[static_cast<std::size_t>(b)];
    }
    double chi2 = 0;
    for (int b = 0; b < bins; ++b) {
      const double e = mass[static_cast<std::size_t>(b)] * p.order_count;
      const double d = counts[static_cast<std::size_t>(b)] - e;
      chi2 += d * d / e;
    }
    // 0.95 quantile of chi-square with 23 degrees of freedom.
    rejections += chi2 >= 35.172;
    mean_chi2 += chi2 / 20;
  }
  EXPECT_LE(rejections, 4);
  // The mean statistic sits near the 23 degrees of freedom.
  EXPECT_NEAR(mean_chi2, 23, 5);
}

TEST(InstanceIo, RoundTrip) {
  ScenarioParams p;
  p.order_count = 50;
  const Instance a = synth_scenario(9, p);
  const Instance b = instance_from_json(instance_to_json(a));
  EXPECT_EQ(a.orders, b.orders);
  EXPECT_EQ(a.drivers, b.drivers);
  EXPECT_EQ(instance_to_json(a), instance_to_json(b));
}

TEST(InstanceIo, MatrixRoundTrip) {
  const Instance a = ref::random_small_instance(4, {});
  const Instance b = instance_from_json(instance_to_json(a));
  ASSERT_TRUE(b.travel.zones().distance_matrix().has_value());
  EXPECT_EQ(*a.travel.zones().distance_matrix(), *b.travel.zones().distance_matrix());
  EXPECT_EQ(instance_to_json(a), instance_to_json(b));
}

TEST(InstanceValidate, RejectsBrokenInvariants) {
  Instance inst = ref::random_small_instance(1, {});
  inst.orders[0].dropoff_time = inst.orders[0].pickup_time;
  EXPECT_THROW(inst.validate(), DataError);
  inst = ref::random_small_instance(1, {});
  inst.orders[0].pickup_time = inst.horizon.end + 1;
  inst.orders[0].dropoff_time = inst.horizon.end + 100;
  EXPECT_THROW(inst.validate(), DataError);
  inst = ref::random_small_instance(1, {});
  inst.idle_cap = 0;
  EXPECT_THROW(inst.validate(), DataError);
  inst = ref::random_small_instance(1, {});
  inst.drivers[0].start_location = ZoneId{77};
  EXPECT_THROW(inst.validate(), DataError);
}
