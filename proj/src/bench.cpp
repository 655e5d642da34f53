#include "spd/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "spd/errors.hpp"
#include "spd/instance_io.hpp"

namespace spd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Runs fn(0..count-1) on up to jobs threads; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct RunPair {
  SimulationTrace base;
  SimulationTrace sp;
};

}  // namespace

void GridSpec::validate() const {
  for (const auto& c : cells) c.validate();
  if (scenarios.empty() && !cells.empty()) throw ConfigError("grid needs at least one scenario");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
}

std::vector<RhcConfig> default_grid_cells() {
  const double rows[][3] = {{10, 5, 8},   {10, 5, 10},  {20, 5, 8},   {20, 5, 10},
                            {20, 10, 15}, {20, 10, 20}, {30, 5, 8},   {30, 5, 10},
                            {30, 10, 15}, {30, 10, 20}, {30, 20, 30}, {60, 5, 8},
                            {60, 10, 30}, {60, 10, 40}, {60, 20, 30}, {60, 30, 40}};
  std::vector<RhcConfig> out;
  for (const auto& r : rows) out.push_back(minutes(r[0], r[1], r[2]));
  return out;
}

double GridReport::mean_improvement_pct() const {
  double s = 0;
  int n = 0;
  for (const auto& c : cells) {
    if (std::isnan(c.improvement_pct)) continue;
    s += c.improvement_pct;
    ++n;
  }
  return n ? s / n : kNaN;
}

GridReport run_grid(const GridSpec& spec) {
  spec.validate();
  const std::size_t n_scen = spec.scenarios.size();
  const std::size_t n_cells = spec.cells.size();
  GridReport report;
  report.offline_rsr.assign(n_scen, kNaN);

  std::vector<std::optional<Predictor>> predictors(n_scen);
  parallel_for(n_scen, spec.jobs, [&](std::size_t s) {
    predictors[s] = spec.predictor(spec.scenarios[s]);
    if (spec.include_offline) report.offline_rsr[s] = solve_offline(spec.scenarios[s]).rsr;
  });

  RunOptions ropt;
  ropt.record_timing = spec.record_timing;
  std::vector<RunPair> runs(n_scen * n_cells);
  parallel_for(runs.size(), spec.jobs, [&](std::size_t k) {
    const std::size_t s = k / n_cells;
    const std::size_t c = k % n_cells;
    const Instance& inst = spec.scenarios[s];
    runs[k].base = run_rhc(inst, spec.cells[c], Weighting::unit(), ropt);
    runs[k].sp = run_rhc(inst, spec.cells[c], Weighting::sink_proximity(*predictors[s]), ropt);
  });

  double offline_mean = 0;
  for (const double v : report.offline_rsr) offline_mean += v;
  offline_mean = spec.include_offline && n_scen ? offline_mean / static_cast<double>(n_scen) : kNaN;

  for (std::size_t c = 0; c < n_cells; ++c) {
    CellResult cell;
    cell.config = spec.cells[c];
    cell.offline_rsr = offline_mean;
    std::size_t len = std::numeric_limits<std::size_t>::max();
    for (std::size_t s = 0; s < n_scen; ++s) {
      const RunPair& r = runs[s * n_cells + c];
      cell.seed_rsr_base.push_back(r.base.final_rsr());
      cell.seed_rsr_sp.push_back(r.sp.final_rsr());
      cell.rsr_base += r.base.final_rsr();
      cell.rsr_sp += r.sp.final_rsr();
      cell.solve_ms_base += r.base.mean_solve_ms();
      cell.solve_ms_sp += r.sp.mean_solve_ms();
      len = std::min(len, r.base.records.size());
    }
    const auto ns = static_cast<double>(n_scen);
    cell.rsr_base /= ns;
    cell.rsr_sp /= ns;
    cell.solve_ms_base /= ns;
    cell.solve_ms_sp /= ns;
    cell.improvement_pct =
        cell.rsr_base > 0 ? (cell.rsr_sp - cell.rsr_base) / cell.rsr_base * 100.0 : kNaN;
    for (std::size_t k = 0; k < len; ++k) {
      double base_rsr = 0, sp_rsr = 0;
      long base_served = 0, sp_served = 0;
      for (std::size_t s = 0; s < n_scen; ++s) {
        const RunPair& r = runs[s * n_cells + c];
        base_rsr += r.base.records[k].cum_rsr;
        sp_rsr += r.sp.records[k].cum_rsr;
        base_served += r.base.records[k].cum_served;
        sp_served += r.sp.records[k].cum_served;
      }
      cell.t.push_back(runs[c].base.records[k].t);
      cell.cum_rsr_base.push_back(base_rsr / ns);
      cell.cum_rsr_sp.push_back(sp_rsr / ns);
      cell.ratio.push_back(base_served == 0
                               ? (sp_served == 0 ? 1.0 : std::numeric_limits<double>::infinity())
                               : static_cast<double>(sp_served) / static_cast<double>(base_served));
    }
    report.cells.push_back(std::move(cell));
  }
  return report;
}

std::string improvement_bucket(double pct) {
  if (std::isnan(pct)) return "";
  if (pct >= 5.0) return "high";
  if (pct >= 1.0) return "mid";
  return "low";
}

std::string grid_csv(const GridReport& report) {
  std::ostringstream out;
  out << "t_o,t_r,t_l,rsr_rhc,rsr_rhc_sp,offline_rsr,improvement_pct,bucket,solve_ms_rhc,"
         "solve_ms_rhc_sp\n";
  for (const auto& c : report.cells) {
    out << format_number(c.config.t_o / 60) << ',' << format_number(c.config.t_r / 60) << ','
        << format_number(c.config.t_l / 60) << ',' << fixed(c.rsr_base, 6) << ','
        << fixed(c.rsr_sp, 6) << ',' << fixed(c.offline_rsr, 6) << ','
        << fixed(c.improvement_pct, 4) << ',' << improvement_bucket(c.improvement_pct) << ','
        << fixed(c.solve_ms_base, 3) << ',' << fixed(c.solve_ms_sp, 3) << '\n';
  }
  return out.str();
}

std::string rolling_csv(const CellResult& cell) {
  std::ostringstream out;
  out << "iter,t,cum_rsr_rhc,cum_rsr_rhc_sp,ratio\n";
  for (std::size_t k = 0; k < cell.t.size(); ++k) {
    out << k << ',' << format_number(cell.t[k]) << ',' << fixed(cell.cum_rsr_base[k], 6) << ','
        << fixed(cell.cum_rsr_sp[k], 6) << ','
        << (std::isinf(cell.ratio[k]) ? std::string("inf") : fixed(cell.ratio[k], 6)) << '\n';
  }
  return out.str();
}

std::string rolling_svg(const GridReport& report) {
  constexpr double kW = 800, kH = 420, kLeft = 60, kRight = 170, kTop = 20, kBottom = 40;
  double t_max = 1, y_lo = 0.95, y_hi = 1.05;
  for (const auto& c : report.cells) {
    for (std::size_t k = 0; k < c.t.size(); ++k) {
      t_max = std::max(t_max, c.t[k]);
      if (std::isfinite(c.ratio[k])) {
        y_lo = std::min(y_lo, c.ratio[k]);
        y_hi = std::max(y_hi, c.ratio[k]);
      }
    }
  }
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  const auto px = [&](double t) { return kLeft + pw * t / t_max; };
  const auto py = [&](double r) { return kTop + ph * (y_hi - r) / (y_hi - y_lo); };
  static const char* palette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                  "#66a61e", "#e6ab02", "#a6761d", "#666666"};

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << fixed(py(1.0), 2) << "\" x2=\"" << kLeft + pw
      << "\" y2=\"" << fixed(py(1.0), 2)
      << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 8
      << "\" text-anchor=\"middle\" font-size=\"12\">time (min)</text>\n";
  out << "<text x=\"14\" y=\"" << kTop + ph / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 "
      << kTop + ph / 2 << ")\" text-anchor=\"middle\">rolling RSR ratio (RHC-SP / RHC)</text>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double r = y_lo + (y_hi - y_lo) * tick / 4.0;
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << fixed(py(r) + 4, 2)
        << "\" text-anchor=\"end\" font-size=\"10\">" << fixed(r, 3) << "</text>\n";
    const double t = t_max * tick / 4.0;
    out << "<text x=\"" << fixed(px(t), 2) << "\" y=\"" << kTop + ph + 14
        << "\" text-anchor=\"middle\" font-size=\"10\">" << fixed(t / 60, 0) << "</text>\n";
  }
  for (std::size_t c = 0; c < report.cells.size(); ++c) {
    const auto& cell = report.cells[c];
    const char* color = palette[c % (sizeof palette / sizeof *palette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t k = 0; k < cell.t.size(); ++k) {
      if (!std::isfinite(cell.ratio[k])) continue;
      out << (first ? "" : " ") << fixed(px(cell.t[k]), 2) << ',' << fixed(py(cell.ratio[k]), 2);
      first = false;
    }
    out << "\"/>\n";
    const double ly = kTop + 12 + 14.0 * static_cast<double>(c);
    out << "<line x1=\"" << kW - kRight + 10 << "\" y1=\"" << ly - 4 << "\" x2=\""
        << kW - kRight + 30 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\"/>\n";
    out << "<text x=\"" << kW - kRight + 35 << "\" y=\"" << ly << "\" font-size=\"10\">"
        << cell.config.label() << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void emit_report(const GridReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw DataError("cannot create output directory " + dir.string());
  }
  write_text_file(dir / "grid.csv", grid_csv(report));
  for (const auto& c : report.cells) {
    write_text_file(dir / ("rolling_" + c.config.label() + ".csv"), rolling_csv(c));
  }
  write_text_file(dir / "rolling.svg", rolling_svg(report));
}

}  // namespace spd
