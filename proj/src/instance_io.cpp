#include "spd/instance_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spd/errors.hpp"

namespace spd {

using nlohmann::json;

namespace {
constexpr const char* kFormat = "spdispatch-instance/1";
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::string instance_to_json(const Instance& inst) {
  json j;
  j["format"] = kFormat;
  j["speed"] = inst.travel.speed();
  j["idle_cap"] = inst.idle_cap;
  j["horizon"] = {inst.horizon.begin, inst.horizon.end};
  j["epoch_time_of_day"] = inst.epoch_time_of_day;
  json zones = json::array();
  for (const auto& z : inst.travel.zones().zones()) zones.push_back({to_int(z.id), z.lat, z.lon});
  j["zones"] = std::move(zones);
  if (const auto& m = inst.travel.zones().distance_matrix()) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < m->cols(); ++c) row.push_back((*m)(r, c));
      rows.push_back(std::move(row));
    }
    j["distance_matrix"] = std::move(rows);
  }
  json orders = json::array();
  for (const auto& o : inst.orders) {
    orders.push_back({o.id, o.pickup_time, o.dropoff_time, to_int(o.origin), to_int(o.destination)});
  }
  j["orders"] = std::move(orders);
  json drivers = json::array();
  for (const auto& d : inst.drivers) drivers.push_back({d.id, d.start_time, to_int(d.start_location)});
  j["drivers"] = std::move(drivers);
  return j.dump(1) + "\n";
}

Instance instance_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("instance file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) throw DataError("unsupported instance format");
    std::vector<Zone> zones;
    for (const auto& z : j.at("zones")) {
      zones.push_back({ZoneId{z.at(0).get<std::int32_t>()}, z.at(1).get<double>(),
                       z.at(2).get<double>()});
    }
    ZoneTable table(std::move(zones));
    if (j.contains("distance_matrix")) {
      const auto& rows = j["distance_matrix"];
      const auto n = static_cast<Eigen::Index>(rows.size());
      Eigen::MatrixXd m(n, n);
      for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = rows.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != n) throw DataError("distance matrix not square");
        for (Eigen::Index c = 0; c < n; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
      }
      table.set_distance_matrix(std::move(m));
    }
    Instance inst;
    inst.travel = TravelModel(std::move(table), j.at("speed").get<double>());
    inst.idle_cap = j.at("idle_cap").get<double>();
    inst.horizon = {j.at("horizon").at(0).get<double>(), j.at("horizon").at(1).get<double>()};
    inst.epoch_time_of_day = j.at("epoch_time_of_day").get<double>();
    for (const auto& o : j.at("orders")) {
      inst.orders.push_back({o.at(0).get<int>(), o.at(1).get<double>(), o.at(2).get<double>(),
                             ZoneId{o.at(3).get<std::int32_t>()}, ZoneId{o.at(4).get<std::int32_t>()}});
    }
    for (const auto& d : j.at("drivers")) {
      inst.drivers.push_back({d.at(0).get<int>(), d.at(1).get<double>(),
                              ZoneId{d.at(2).get<std::int32_t>()}});
    }
    inst.validate();
    return inst;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed instance file: ") + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_instance(const Instance& inst, const std::filesystem::path& path) {
  write_text_file(path, instance_to_json(inst));
}

Instance read_instance(const std::filesystem::path& path) {
  return instance_from_json(read_text_file(path));
}

}  // namespace spd
