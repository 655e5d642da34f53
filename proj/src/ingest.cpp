#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

#include "spd/errors.hpp"
#include "spd/trip_model.hpp"

namespace spd {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    auto field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                  : pos - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '"')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '"' || field.back() == '\r')) {
      field.remove_suffix(1);
    }
    out.push_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

bool parse_real(std::string_view s, double& out) {
  if (s.empty()) return false;
  std::string buf(s);
  char* end = nullptr;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size() && std::isfinite(out);
}

// Days since 1970-01-01 of a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::optional<std::int64_t> try_parse_timestamp(std::string_view s) {
  // YYYY-MM-DD[ T]HH:MM[:SS]
  if (s.size() < 16) return std::nullopt;
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  if (!parse_number(s.substr(0, 4), y) || s[4] != '-' || !parse_number(s.substr(5, 2), mo) ||
      s[7] != '-' || !parse_number(s.substr(8, 2), d) || (s[10] != ' ' && s[10] != 'T') ||
      !parse_number(s.substr(11, 2), h) || s[13] != ':' || !parse_number(s.substr(14, 2), mi)) {
    return std::nullopt;
  }
  if (s.size() >= 19) {
    if (s[16] != ':' || !parse_number(s.substr(17, 2), sec)) return std::nullopt;
    // Fractional seconds or a trailing zone designator are ignored.
  } else if (s.size() != 16) {
    return std::nullopt;
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60) return std::nullopt;
  return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
         h * 3600 + mi * 60 + sec;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::map<std::string, std::size_t, std::less<>> header_columns(const std::string& header) {
  std::map<std::string, std::size_t, std::less<>> cols;
  const auto fields = split_csv(header);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    std::string name(fields[i]);
    if (i == 0 && name.size() >= 3 && name.compare(0, 3, "\xEF\xBB\xBF") == 0) name.erase(0, 3);
    cols.emplace(std::move(name), i);
  }
  return cols;
}

std::size_t require_column(const std::map<std::string, std::size_t, std::less<>>& cols,
                           std::string_view name, const std::filesystem::path& path) {
  const auto it = cols.find(name);
  if (it == cols.end()) {
    throw DataError("missing column '" + std::string(name) + "' in " + path.string());
  }
  return it->second;
}

}  // namespace

std::int64_t parse_timestamp(const std::string& text) {
  const auto t = try_parse_timestamp(text);
  if (!t) throw DataError("bad timestamp '" + text + "'");
  return *t;
}

IngestResult ingest_trips(const std::filesystem::path& path, const ZoneTable& zones,
                          AbsoluteInterval filter) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty trip file " + path.string());
  const auto cols = header_columns(line);
  const std::size_t c_pu = require_column(cols, "pickup_datetime", path);
  const std::size_t c_do = require_column(cols, "dropoff_datetime", path);
  const std::size_t c_oz = require_column(cols, "pu_zone", path);
  const std::size_t c_dz = require_column(cols, "do_zone", path);
  const std::size_t needed = std::max({c_pu, c_do, c_oz, c_dz}) + 1;

  IngestResult result;
  result.epoch = filter.begin;
  // (pickup, line number) keeps the ordering stable for equal pickups.
  std::vector<std::pair<std::int64_t, Order>> kept;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++result.stats.rows;
    const auto f = split_csv(line);
    std::int32_t oz = 0, dz = 0;
    const auto pu = f.size() >= needed ? try_parse_timestamp(f[c_pu]) : std::nullopt;
    const auto dof = f.size() >= needed ? try_parse_timestamp(f[c_do]) : std::nullopt;
    if (!pu || !dof || !parse_number(f[c_oz], oz) || !parse_number(f[c_dz], dz)) {
      ++result.stats.malformed;
      continue;
    }
    if (!zones.contains(ZoneId{oz}) || !zones.contains(ZoneId{dz})) {
      ++result.stats.unknown_zone;
      continue;
    }
    if (*dof <= *pu) {
      ++result.stats.bad_times;
      continue;
    }
    if (*pu < filter.begin || *pu >= filter.end) {
      ++result.stats.outside_window;
      continue;
    }
    Order o;
    o.pickup_time = static_cast<Seconds>(*pu - filter.begin);
    o.dropoff_time = static_cast<Seconds>(*dof - filter.begin);
    o.origin = ZoneId{oz};
    o.destination = ZoneId{dz};
    kept.emplace_back(*pu, o);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  result.orders.reserve(kept.size());
  for (auto& [_, o] : kept) {
    o.id = static_cast<int>(result.orders.size());
    result.orders.push_back(o);
  }
  result.stats.kept = result.orders.size();
  if (result.orders.empty()) {
    throw DataError("no usable trips in " + path.string() + " for the requested interval");
  }
  return result;
}

ZoneTable load_zone_table(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty zone file " + path.string());
  const auto cols = header_columns(line);
  const std::size_t c_id = require_column(cols, "zone_id", path);
  const std::size_t c_lat = require_column(cols, "lat", path);
  const std::size_t c_lon = require_column(cols, "lon", path);
  std::vector<Zone> zones;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    Zone z;
    std::int32_t id = 0;
    if (f.size() <= std::max({c_id, c_lat, c_lon}) || !parse_number(f[c_id], id) ||
        !parse_real(f[c_lat], z.lat) || !parse_real(f[c_lon], z.lon)) {
      throw DataError("malformed zone row at " + path.string() + ":" + std::to_string(lineno));
    }
    z.id = ZoneId{id};
    zones.push_back(z);
  }
  if (zones.empty()) throw DataError("zone file " + path.string() + " has no zones");
  return ZoneTable(std::move(zones));
}

Eigen::MatrixXd load_distance_matrix(const std::filesystem::path& path, const ZoneTable& zones) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty matrix file " + path.string());
  const auto head = split_csv(line);
  std::vector<std::size_t> col_zone;
  for (std::size_t i = 1; i < head.size(); ++i) {
    std::int32_t id = 0;
    if (!parse_number(head[i], id)) throw DataError("bad zone id in matrix header");
    col_zone.push_back(zones.index_of(ZoneId{id}));
  }
  const auto n = static_cast<Eigen::Index>(zones.size());
  if (static_cast<Eigen::Index>(col_zone.size()) != n) {
    throw DataError("distance matrix must cover every zone exactly once");
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, -1.0);
  std::vector<bool> seen(zones.size(), false);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    std::int32_t id = 0;
    if (f.size() != head.size() || !parse_number(f[0], id)) {
      throw DataError("malformed distance matrix row");
    }
    const std::size_t r = zones.index_of(ZoneId{id});
    if (seen[r]) throw DataError("duplicate distance matrix row " + std::to_string(id));
    seen[r] = true;
    for (std::size_t c = 1; c < f.size(); ++c) {
      double v = 0;
      if (!parse_real(f[c], v)) throw DataError("bad distance matrix cell");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col_zone[c - 1])) = v;
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw DataError("distance matrix is missing rows");
  }
  return m;
}

}  // namespace spd
