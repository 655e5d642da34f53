#include "spd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "spd/bench.hpp"
#include "spd/dispatch.hpp"
#include "spd/errors.hpp"
#include "spd/instance_io.hpp"
#include "spd/sink_prox.hpp"
#include "spd/sp_forecast.hpp"

namespace spd {

namespace {

namespace fs = std::filesystem;

struct Common {
  std::optional<double> speed;     // m/s
  std::optional<double> idle_cap;  // minutes
  double buffer = 20;              // minutes
  std::string predictor = "constant";
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  int jobs = 1;
  double t_o = 10, t_r = 5, t_l = 8;  // minutes
  bool timing = false;
};

Predictor make_predictor(const std::string& spec, const Instance& inst) {
  if (spec == "constant") return Predictor::constant();
  if (spec == "oracle") return Predictor::oracle(inst);
  if (spec.rfind("model:", 0) == 0) return Predictor::learned(load_model(spec.substr(6)));
  throw ConfigError("unknown predictor '" + spec + "' (constant, oracle or model:<path>)");
}

PredictorFactory predictor_factory(const std::string& spec) {
  if (spec.rfind("model:", 0) == 0) {
    auto model = std::make_shared<SpModel>(load_model(spec.substr(6)));
    return [model](const Instance&) { return Predictor::learned(*model); };
  }
  if (spec != "constant" && spec != "oracle") {
    throw ConfigError("unknown predictor '" + spec + "' (constant, oracle or model:<path>)");
  }
  return [spec](const Instance& inst) { return make_predictor(spec, inst); };
}

void apply_overrides(Instance& inst, const Common& c) {
  if (c.speed) inst.travel = TravelModel(inst.travel.zones(), *c.speed);
  if (c.idle_cap) {
    if (!(*c.idle_cap > 0)) throw ConfigError("--idle-cap must be positive");
    inst.idle_cap = *c.idle_cap * 60;
  }
}

Instance load_instance(const std::string& path, const Common& c) {
  if (path.empty()) throw ConfigError("--instance is required");
  if (!fs::exists(path)) throw ConfigError("instance file " + path + " does not exist");
  Instance inst = read_instance(path);
  apply_overrides(inst, c);
  return inst;
}

RhcConfig window_config(const Common& c) {
  const RhcConfig cfg = minutes(c.t_o, c.t_r, c.t_l);
  cfg.validate();
  return cfg;
}

std::string plan_csv(const DispatchPlan& plan, const Instance& inst) {
  std::ostringstream out;
  out << "driver_id,orders\n";
  for (const auto& r : plan.routes) {
    out << r.driver_id << ',';
    for (std::size_t k = 0; k < r.orders.size(); ++k) {
      out << (k ? " " : "") << inst.orders[static_cast<std::size_t>(r.orders[k])].id;
    }
    out << '\n';
  }
  return out.str();
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// "from,to" lines with node names; the node named "t" is the sink.
Dag read_graph(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  Dag dag;
  std::map<std::string, int> ids;
  const auto id_of = [&](const std::string& name) {
    const auto [it, fresh] = ids.emplace(name, dag.size());
    if (fresh) {
      dag.succ.emplace_back();
      dag.names.push_back(name);
    }
    return it->second;
  };
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line == "from,to") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError("graph line without comma: " + line);
    const int a = id_of(line.substr(0, comma));
    const int b = id_of(line.substr(comma + 1));
    dag.add_edge(a, b);
  }
  const auto sink = ids.find("t");
  if (sink == ids.end()) throw DataError("graph has no sink node 't'");
  dag.sink = sink->second;
  return dag;
}

std::map<int, double> read_tssp_csv(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("order_id,sp,t_e,tssp", 0) != 0) {
    throw DataError("training data must have header order_id,sp,t_e,tssp");
  }
  std::map<int, double> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id, sp, te, ts;
    if (!std::getline(row, id, ',') || !std::getline(row, sp, ',') || !std::getline(row, te, ',') ||
        !std::getline(row, ts)) {
      throw DataError("malformed training row: " + line);
    }
    out[std::stoi(id)] = std::stod(ts);
  }
  return out;
}

struct Context {
  std::ostream& out;
  std::ostream& err;
};

// --- subcommands ------------------------------------------------------------

int cmd_ingest(Context& ctx, const Common& c, const std::string& trips, const std::string& zones,
               const std::string& matrix, const std::string& from, const std::string& to) {
  for (const auto* p : {&trips, &zones}) {
    if (!fs::exists(*p)) throw ConfigError("input file " + *p + " does not exist");
  }
  if (!matrix.empty() && !fs::exists(matrix)) throw ConfigError("matrix file does not exist");
  ZoneTable table = load_zone_table(zones);
  if (!matrix.empty()) table.set_distance_matrix(load_distance_matrix(matrix, table));
  AbsoluteInterval filter{parse_timestamp(from), parse_timestamp(to)};
  if (filter.end <= filter.begin) throw ConfigError("--to must be after --from");
  IngestResult res = ingest_trips(trips, table, filter);

  Instance inst;
  inst.travel = TravelModel(std::move(table), c.speed.value_or(kDefaultSpeed));
  inst.idle_cap = c.idle_cap.value_or(30) * 60;
  inst.horizon = {0, static_cast<Seconds>(filter.end - filter.begin)};
  inst.epoch_time_of_day = static_cast<Seconds>(((filter.begin % 86400) + 86400) % 86400);
  inst.orders = std::move(res.orders);
  // Trip records carry no fleet: one driver per fifth order, waiting at that
  // order's origin from time 0.
  for (std::size_t i = 0; i < inst.orders.size(); i += 5) {
    inst.drivers.push_back({static_cast<int>(inst.drivers.size()), 0, inst.orders[i].origin});
  }
  inst.validate();
  const fs::path out = fs::path(c.out_dir) / "instance.json";
  write_instance(inst, out);
  const auto& s = res.stats;
  ctx.out << "rows " << s.rows << " kept " << s.kept << " malformed " << s.malformed
          << " unknown_zone " << s.unknown_zone << " bad_times " << s.bad_times
          << " outside_window " << s.outside_window << '\n';
  ctx.out << "wrote " << out.string() << '\n';
  return kExitOk;
}

ScenarioParams synth_params(const Common& c, int orders, double ratio, int grid, double horizon) {
  ScenarioParams p;
  p.order_count = orders;
  p.driver_ratio = ratio;
  p.grid_rows = p.grid_cols = grid;
  p.horizon = horizon * 60;
  for (auto& pk : p.peaks) pk.center = std::min(pk.center, p.horizon / 2);
  if (c.speed) p.speed = *c.speed;
  if (c.idle_cap) p.idle_cap = *c.idle_cap * 60;
  return p;
}

int cmd_synth(Context& ctx, const Common& c, const ScenarioParams& p) {
  if (!c.seed) throw ConfigError("--seed is required for synthetic scenarios");
  const Instance inst = synth_scenario(*c.seed, p);
  const fs::path out = fs::path(c.out_dir) / "instance.json";
  write_instance(inst, out);
  ctx.out << "orders " << inst.orders.size() << " drivers " << inst.drivers.size() << '\n';
  ctx.out << "wrote " << out.string() << '\n';
  return kExitOk;
}

int cmd_sp(Context& ctx, const Common& c, const std::string& mode, const std::string& instance,
           const std::string& graph, const std::string& data, bool do_grid, int folds) {
  const fs::path dir(c.out_dir);
  const Seconds buffer = c.buffer * 60;
  if (mode == "compute") {
    if (!graph.empty()) {
      const Dag dag = read_graph(graph);
      const SpResult r = longest_path_to_sink(dag);
      std::ostringstream csv;
      csv << "node,sp\n";
      for (int v = 0; v < dag.size(); ++v) {
        csv << dag.names[static_cast<std::size_t>(v)] << ',' << r.sp[static_cast<std::size_t>(v)]
            << '\n';
      }
      write_text_file(dir / "sp.csv", csv.str());
    } else {
      const Instance inst = load_instance(instance, c);
      const OrderSp sp = compute_order_sp(inst);
      const TsspResult ts = standardize(sp.sp, inst.orders, sp.t_sink, buffer);
      write_text_file(dir / "sp.csv", sp_table_csv(inst.orders, sp.sp, ts));
    }
    ctx.out << "wrote " << (dir / "sp.csv").string() << '\n';
    return kExitOk;
  }
  if (mode == "train") {
    const Instance inst = load_instance(instance, c);
    std::vector<SpSample> samples;
    if (!data.empty()) {
      const auto targets = read_tssp_csv(data);
      for (const auto& o : inst.orders) {
        const auto it = targets.find(o.id);
        if (it != targets.end()) samples.push_back({features_of(o, inst), it->second});
      }
    } else {
      samples = training_samples(inst, buffer);
    }
    TrainOptions topt;
    topt.t_buffer = buffer;
    SvrHyper hyper = reference_hyper();
    if (do_grid) {
      const GridSearchResult g = grid_search(samples, default_grid(), folds, topt);
      hyper = g.best;
      ctx.out << "grid search best kernel " << to_string(hyper.kernel) << " C " << hyper.C
              << " gamma " << hyper.gamma << " epsilon " << hyper.epsilon << " cv_r2 "
              << fixed6(g.best_score) << '\n';
    }
    const SpModel model = train_svr(samples, hyper, topt);
    save_model(model, dir / "model.txt");
    ctx.out << "samples " << samples.size() << " support_vectors " << model.svr.support.rows() << '\n';
    ctx.out << "wrote " << (dir / "model.txt").string() << '\n';
    return kExitOk;
  }
  if (mode == "predict") {
    const Instance inst = load_instance(instance, c);
    const Predictor pred = make_predictor(c.predictor, inst);
    const OrderSp truth = compute_order_sp(inst);
    std::vector<int> idx(inst.orders.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    const auto sp = pred.predict_sp(inst, idx, truth.t_sink);
    std::ostringstream csv;
    csv << "order_id,sp,sp_pred\n";
    Eigen::VectorXd t(static_cast<Eigen::Index>(idx.size())), p(t.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      csv << inst.orders[i].id << ',' << truth.sp[i] << ',' << sp[i] << '\n';
      t(static_cast<Eigen::Index>(i)) = truth.sp[i];
      p(static_cast<Eigen::Index>(i)) = sp[i];
    }
    write_text_file(dir / "sp_pred.csv", csv.str());
    ctx.out << "r2 " << fixed6(idx.empty() ? 0.0 : r2_score(t, p)) << '\n';
    ctx.out << "wrote " << (dir / "sp_pred.csv").string() << '\n';
    return kExitOk;
  }
  throw ConfigError("sp mode must be compute, train or predict");
}

int cmd_run(Context& ctx, const Common& c, const std::string& instance, const std::string& algo) {
  const Instance inst = load_instance(instance, c);
  const fs::path dir(c.out_dir);
  if (algo == "offline") {
    const DispatchPlan plan = solve_offline(inst);
    write_text_file(dir / "plan.csv", plan_csv(plan, inst));
    ctx.out << "served " << plan.served_count << " of " << inst.orders.size() << '\n';
    ctx.out << "rsr " << fixed6(plan.rsr) << '\n';
    return kExitOk;
  }
  if (algo != "rhc" && algo != "rhc-sp") throw ConfigError("--algo must be offline, rhc or rhc-sp");
  const RhcConfig cfg = window_config(c);
  RunOptions ropt;
  ropt.record_timing = c.timing;
  std::optional<Predictor> pred;
  if (algo == "rhc-sp") pred = make_predictor(c.predictor, inst);
  const SimulationTrace trace =
      run_rhc(inst, cfg, pred ? Weighting::sink_proximity(*pred) : Weighting::unit(), ropt);
  write_text_file(dir / "trace.csv", trace_csv(trace));
  write_text_file(dir / "plan.csv", plan_csv(trace.plan, inst));
  ctx.out << "served " << trace.plan.served_count << " of " << inst.orders.size() << '\n';
  ctx.out << "rsr " << fixed6(trace.final_rsr()) << '\n';
  return kExitOk;
}

std::vector<RhcConfig> parse_cells(const std::string& text) {
  if (text == "default") return default_grid_cells();
  std::vector<RhcConfig> cells;
  std::istringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    double a = 0, b = 0, d = 0;
    char s1 = 0, s2 = 0;
    std::istringstream cs(cell);
    if (!(cs >> a >> s1 >> b >> s2 >> d) || s1 != '-' || s2 != '-') {
      throw ConfigError("bad cell '" + cell + "' (expected t_o-t_r-t_l in minutes)");
    }
    cells.push_back(minutes(a, b, d));
  }
  return cells;
}

int cmd_grid(Context& ctx, const Common& c, const std::vector<std::string>& instances,
             const std::vector<std::uint64_t>& seeds, const ScenarioParams& params,
             const std::string& cells, bool no_offline) {
  GridSpec spec;
  spec.cells = parse_cells(cells);
  for (const auto& p : instances) spec.scenarios.push_back(load_instance(p, c));
  for (const auto s : seeds) spec.scenarios.push_back(synth_scenario(s, params));
  if (spec.scenarios.empty()) {
    if (!c.seed) throw ConfigError("grid needs --instance, --synth-seeds or --seed");
    spec.scenarios.push_back(synth_scenario(*c.seed, params));
  }
  spec.predictor = predictor_factory(c.predictor);
  spec.include_offline = !no_offline;
  spec.record_timing = c.timing;
  spec.jobs = c.jobs;
  const GridReport report = run_grid(spec);
  emit_report(report, c.out_dir);
  ctx.out << "cells " << report.cells.size() << " scenarios " << spec.scenarios.size()
          << " mean_improvement_pct " << fixed6(report.mean_improvement_pct()) << '\n';
  ctx.out << "wrote " << (fs::path(c.out_dir) / "grid.csv").string() << '\n';
  return kExitOk;
}

void add_common(CLI::App* app, Common& c, bool windows, bool predictor) {
  app->add_option("--speed", c.speed, "Average vehicle speed (m/s)")->check(CLI::PositiveNumber);
  app->add_option("--idle-cap", c.idle_cap, "Maximum driver idle time (minutes)");
  app->add_option("--seed", c.seed, "Scenario seed");
  app->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
  if (windows) {
    app->add_option("--t-o", c.t_o, "Optimization window (minutes)")->capture_default_str();
    app->add_option("--t-r", c.t_r, "Rolling step (minutes)")->capture_default_str();
    app->add_option("--t-l", c.t_l, "Locked window (minutes)")->capture_default_str();
    app->add_flag("--timing", c.timing, "Record wall-clock solve time per iteration");
  }
  if (predictor) {
    app->add_option("--predictor", c.predictor, "constant | oracle | model:<path>")
        ->capture_default_str();
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ride-hailing dispatch with sink-proximity weighting", "spdispatch"};
  app.set_config("--config", "", "INI/TOML file with default flag values");
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  app.require_subcommand(1);
  Common c;
  Context ctx{out, err};

  std::string trips, zones, matrix, from, to, instance, algo = "rhc", mode, graph, data;
  std::string cells = "default";
  std::vector<std::string> instances;
  std::vector<std::uint64_t> synth_seeds;
  int orders = 2000, grid = 8, folds = 3;
  double ratio = 0.2, horizon = 120;
  bool do_grid = false, no_offline = false;

  auto* ingest = app.add_subcommand("ingest", "Build an instance from trip and zone CSVs");
  add_common(ingest, c, false, false);
  ingest->add_option("--trips", trips, "Trip CSV")->required();
  ingest->add_option("--zones", zones, "Zone CSV")->required();
  ingest->add_option("--matrix", matrix, "Zone distance matrix CSV (meters)");
  ingest->add_option("--from", from, "Window start, e.g. 2022-06-01T08:00:00")->required();
  ingest->add_option("--to", to, "Window end (exclusive)")->required();

  auto add_synth_opts = [&](CLI::App* a) {
    a->add_option("--orders", orders, "Order count")->capture_default_str();
    a->add_option("--driver-ratio", ratio, "Drivers per order")->capture_default_str();
    a->add_option("--grid", grid, "Zone grid side length")->capture_default_str();
    a->add_option("--horizon", horizon, "Scenario length (minutes)")->capture_default_str();
  };
  auto* synth = app.add_subcommand("synth", "Generate a synthetic peaked-demand instance");
  add_common(synth, c, false, false);
  add_synth_opts(synth);

  auto* sp = app.add_subcommand("sp", "Sink proximity: compute, train or predict");
  add_common(sp, c, false, true);
  sp->add_option("mode", mode, "compute | train | predict")
      ->required()
      ->check(CLI::IsMember({"compute", "train", "predict"}));
  sp->add_option("--instance", instance, "Instance file");
  sp->add_option("--graph", graph, "Edge list 'from,to' with sink 't' (compute only)");
  sp->add_option("--data", data, "Training CSV order_id,sp,t_e,tssp (train only)");
  sp->add_option("--buffer", c.buffer, "TSSP buffer time (minutes)")->capture_default_str();
  sp->add_flag("--grid-search", do_grid, "Cross-validated search over the default grid");
  sp->add_option("--folds", folds, "Cross-validation folds")->capture_default_str();

  auto* run = app.add_subcommand("run", "Run one dispatch algorithm on an instance");
  add_common(run, c, true, true);
  run->add_option("--instance", instance, "Instance file")->required();
  run->add_option("--algo", algo, "offline | rhc | rhc-sp")
      ->capture_default_str()
      ->check(CLI::IsMember({"offline", "rhc", "rhc-sp"}));

  auto* gridcmd = app.add_subcommand("grid", "Compare RHC and RHC-SP over a window grid");
  add_common(gridcmd, c, false, true);
  add_synth_opts(gridcmd);
  gridcmd->add_flag("--timing", c.timing, "Record wall-clock solve time per iteration");
  gridcmd->add_option("--instance", instances, "Instance files (one scenario each)");
  gridcmd->add_option("--synth-seeds", synth_seeds, "Synthetic scenario seeds")->delimiter(',');
  gridcmd->add_option("--cells", cells, "'default' or t_o-t_r-t_l list in minutes")
      ->capture_default_str();
  gridcmd->add_option("--jobs", c.jobs, "Worker threads")->capture_default_str();
  gridcmd->add_flag("--no-offline", no_offline, "Skip the offline reference");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*ingest) return cmd_ingest(ctx, c, trips, zones, matrix, from, to);
    if (*synth) return cmd_synth(ctx, c, synth_params(c, orders, ratio, grid, horizon));
    if (*sp) return cmd_sp(ctx, c, mode, instance, graph, data, do_grid, folds);
    if (*run) return cmd_run(ctx, c, instance, algo);
    if (*gridcmd) {
      return cmd_grid(ctx, c, instances, synth_seeds, synth_params(c, orders, ratio, grid, horizon),
                      cells, no_offline);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitConfig;
}

}  // namespace spd
