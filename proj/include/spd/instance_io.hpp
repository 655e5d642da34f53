#pragma once

#include <filesystem>
#include <string>

#include "spd/trip_model.hpp"

namespace spd {

// Instance container: a JSON document with fields format, speed, idle_cap,
// horizon, epoch_time_of_day, zones, optional distance_matrix, orders, drivers.
std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);

void write_instance(const Instance& inst, const std::filesystem::path& path);
Instance read_instance(const std::filesystem::path& path);

// Writes text to path, creating parent directories. Throws DataError.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// Shortest round-trip decimal representation.
std::string format_number(double v);

}  // namespace spd
