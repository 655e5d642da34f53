#include "spd/sp_forecast.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "spd/errors.hpp"
#include "spd/instance_io.hpp"

namespace spd {

std::string to_string(KernelType k) {
  switch (k) {
    case KernelType::Poly:
      return "poly";
    case KernelType::Rbf:
      return "rbf";
    case KernelType::Sigmoid:
      return "sigmoid";
  }
  return "?";
}

KernelType kernel_from_string(const std::string& s) {
  if (s == "poly") return KernelType::Poly;
  if (s == "rbf") return KernelType::Rbf;
  if (s == "sigmoid") return KernelType::Sigmoid;
  throw ConfigError("unknown kernel '" + s + "'");
}

namespace {

Seconds time_of_day(Seconds epoch_tod, Seconds t) {
  const double v = std::fmod(epoch_tod + t, 86400.0);
  return v < 0 ? v + 86400.0 : v;
}

Eigen::MatrixXd feature_matrix(std::span<const SpSample> samples) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(samples.size()), kFeatureCount);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = samples[i].features.row();
  }
  return X;
}

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double unhex(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw DataError("bad number '" + s + "' in model file");
  return v;
}

}  // namespace

SpFeatures features_of(const Order& order, const Instance& inst) {
  const auto& zones = inst.travel.zones();
  const Zone& o = zones.zone(order.origin);
  const Zone& d = zones.zone(order.destination);
  return {o.lat, o.lon, d.lat, d.lon, time_of_day(inst.epoch_time_of_day, order.pickup_time),
          time_of_day(inst.epoch_time_of_day, order.dropoff_time)};
}

std::vector<SpSample> training_samples(const Instance& inst, Seconds t_buffer) {
  const OrderSp sp = compute_order_sp(inst);
  const TsspResult ts = standardize(sp.sp, inst.orders, sp.t_sink, t_buffer);
  std::vector<SpSample> out;
  out.reserve(inst.orders.size());
  for (std::size_t i = 0; i < inst.orders.size(); ++i) {
    if (sp.sp[i] == kNoSinkPath) continue;
    out.push_back({features_of(inst.orders[i], inst), ts.tssp[i]});
  }
  return out;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& raw) const {
  return (raw.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::VectorXd SpModel::predict_tssp(const Eigen::MatrixXd& raw_features) const {
  return svr.predict(standardizer.apply(raw_features)) / target_scale;
}

double SpModel::predict_tssp(const SpFeatures& f) const {
  const Eigen::MatrixXd raw = f.row();
  return predict_tssp(raw)(0);
}

SpModel train_svr(std::span<const SpSample> samples, const SvrHyper& hyper,
                  const TrainOptions& opt) {
  if (samples.size() < 2) throw ConfigError("training needs at least two samples");
  const Eigen::MatrixXd X = feature_matrix(samples);
  SpModel m;
  m.t_buffer = opt.t_buffer;
  m.standardizer.mean = X.colwise().mean().transpose();
  m.standardizer.scale =
      ((X.rowwise() - m.standardizer.mean.transpose()).array().square().colwise().sum() /
       static_cast<double>(X.rows()))
          .sqrt()
          .transpose();
  for (Eigen::Index c = 0; c < m.standardizer.scale.size(); ++c) {
    if (!(m.standardizer.scale(c) > 0)) {
      std::cerr << "warning: feature " << c << " has zero variance; scale forced to 1\n";
      m.standardizer.scale(c) = 1.0;
    }
  }
  Eigen::VectorXd y(X.rows());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    y(static_cast<Eigen::Index>(i)) = samples[i].tssp * m.target_scale;
  }
  SmoStats stats;
  m.svr = fit_epsilon_svr<double>(m.standardizer.apply(X), y, hyper, opt.smo, &stats);
  if (!stats.converged) {
    std::cerr << "warning: SMO stopped after " << stats.iterations
              << " iterations without reaching tolerance\n";
  }
  return m;
}

HyperGrid default_grid() {
  return {{KernelType::Poly, KernelType::Rbf, KernelType::Sigmoid},
          {100, 200, 300, 400, 500},
          {0.001, 0.01, 0.1},
          {0.01, 0.05, 0.1, 0.2, 0.5}};
}

GridSearchResult grid_search(std::span<const SpSample> samples, const HyperGrid& grid, int folds,
                             const TrainOptions& opt) {
  if (grid.size() == 0) throw ConfigError("hyperparameter grid is empty");
  if (folds < 2) throw ConfigError("cross-validation needs at least two folds");
  if (samples.size() < static_cast<std::size_t>(2 * folds)) {
    throw ConfigError("too few samples for the requested folds");
  }
  std::vector<std::vector<SpSample>> train(static_cast<std::size_t>(folds));
  std::vector<std::vector<SpSample>> test(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto f = i % static_cast<std::size_t>(folds);
    for (std::size_t k = 0; k < train.size(); ++k) {
      (k == f ? test[k] : train[k]).push_back(samples[i]);
    }
  }

  GridSearchResult res;
  bool have = false;
  auto C_sorted = grid.C;
  std::sort(C_sorted.begin(), C_sorted.end());
  auto eps_sorted = grid.epsilon;
  std::sort(eps_sorted.rbegin(), eps_sorted.rend());
  for (const KernelType k : grid.kernels) {
    for (const double C : C_sorted) {
      for (const double g : grid.gamma) {
        for (const double e : eps_sorted) {
          SvrHyper h;
          h.kernel = k;
          h.C = C;
          h.gamma = g;
          h.epsilon = e;
          double score = 0;
          for (std::size_t f = 0; f < train.size(); ++f) {
            const SpModel m = train_svr(train[f], h, opt);
            Eigen::VectorXd truth(static_cast<Eigen::Index>(test[f].size()));
            for (std::size_t i = 0; i < test[f].size(); ++i) {
              truth(static_cast<Eigen::Index>(i)) = test[f][i].tssp;
            }
            score += r2_score(truth, m.predict_tssp(feature_matrix(test[f])));
          }
          score /= static_cast<double>(folds);
          if (!std::isfinite(score)) score = -std::numeric_limits<double>::infinity();
          res.scores.emplace_back(h, score);
          const bool better =
              !have || score > res.best_score ||
              (score == res.best_score &&
               (h.C < res.best.C || (h.C == res.best.C && h.epsilon > res.best.epsilon)));
          if (better) {
            res.best = h;
            res.best_score = score;
            have = true;
          }
        }
      }
    }
  }
  return res;
}

std::string serialize_model(const SpModel& m) {
  std::ostringstream out;
  const auto& h = m.svr.hyper;
  out << "spmodel 1\n";
  out << "kernel " << to_string(h.kernel) << '\n';
  out << "C " << hex(h.C) << '\n';
  out << "gamma " << hex(h.gamma) << '\n';
  out << "epsilon " << hex(h.epsilon) << '\n';
  out << "degree " << h.degree << '\n';
  out << "coef0 " << hex(h.coef0) << '\n';
  out << "t_buffer " << hex(m.t_buffer) << '\n';
  out << "target_scale " << hex(m.target_scale) << '\n';
  out << "bias " << hex(m.svr.bias) << '\n';
  out << "features " << m.standardizer.mean.size() << '\n';
  out << "mean";
  for (const double v : m.standardizer.mean) out << ' ' << hex(v);
  out << "\nscale";
  for (const double v : m.standardizer.scale) out << ' ' << hex(v);
  out << "\nsupport " << m.svr.support.rows() << '\n';
  for (Eigen::Index r = 0; r < m.svr.support.rows(); ++r) {
    out << hex(m.svr.coef(r));
    for (Eigen::Index c = 0; c < m.svr.support.cols(); ++c) out << ' ' << hex(m.svr.support(r, c));
    out << '\n';
  }
  return out.str();
}

SpModel deserialize_model(const std::string& text) {
  std::istringstream in(text);
  std::string key, val;
  const auto expect = [&](const char* name) {
    if (!(in >> key) || key != name) throw DataError(std::string("model file: expected ") + name);
    if (!(in >> val)) throw DataError(std::string("model file: missing value for ") + name);
    return val;
  };
  if (!(in >> key >> val) || key != "spmodel") throw DataError("not a model file");
  if (val != "1") throw DataError("unsupported model version " + val);
  SpModel m;
  auto& h = m.svr.hyper;
  h.kernel = kernel_from_string(expect("kernel"));
  h.C = unhex(expect("C"));
  h.gamma = unhex(expect("gamma"));
  h.epsilon = unhex(expect("epsilon"));
  h.degree = std::stoi(expect("degree"));
  h.coef0 = unhex(expect("coef0"));
  m.t_buffer = unhex(expect("t_buffer"));
  m.target_scale = unhex(expect("target_scale"));
  m.svr.bias = unhex(expect("bias"));
  const int nf = std::stoi(expect("features"));
  if (nf != kFeatureCount) throw DataError("model file has the wrong feature count");
  const auto read_vec = [&](const char* name) {
    if (!(in >> key) || key != name) throw DataError(std::string("model file: expected ") + name);
    Eigen::VectorXd v(nf);
    for (int c = 0; c < nf; ++c) {
      if (!(in >> val)) throw DataError("model file truncated");
      v(c) = unhex(val);
    }
    return v;
  };
  m.standardizer.mean = read_vec("mean");
  m.standardizer.scale = read_vec("scale");
  if ((m.standardizer.scale.array() <= 0).any()) throw DataError("model scale must be positive");
  const long n_sv = std::stol(expect("support"));
  if (n_sv < 0) throw DataError("negative support vector count");
  m.svr.support.resize(n_sv, nf);
  m.svr.coef.resize(n_sv);
  for (long r = 0; r < n_sv; ++r) {
    if (!(in >> val)) throw DataError("model file truncated");
    m.svr.coef(r) = unhex(val);
    for (int c = 0; c < nf; ++c) {
      if (!(in >> val)) throw DataError("model file truncated");
      m.svr.support(r, c) = unhex(val);
    }
  }
  return m;
}

void save_model(const SpModel& m, const std::filesystem::path& path) {
  write_text_file(path, serialize_model(m));
}

SpModel load_model(const std::filesystem::path& path) {
  return deserialize_model(read_text_file(path));
}

Predictor Predictor::oracle(const Instance& inst) {
  return Predictor(Oracle{compute_order_sp(inst).sp});
}

std::string Predictor::name() const {
  if (is_constant()) return "constant";
  if (is_oracle()) return "oracle";
  return "model";
}

std::vector<int> Predictor::predict_sp(const Instance& inst, std::span<const int> order_indices,
                                       Seconds t_sink) const {
  std::vector<int> out(order_indices.size(), 1);
  if (const auto* o = std::get_if<Oracle>(&v_)) {
    if (o->sp.size() != inst.orders.size()) {
      throw ConfigError("oracle predictor was built for a different instance");
    }
    for (std::size_t i = 0; i < order_indices.size(); ++i) {
      out[i] = std::max(0, o->sp[static_cast<std::size_t>(order_indices[i])]);
    }
  } else if (const auto* l = std::get_if<Learned>(&v_)) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(order_indices.size()), kFeatureCount);
    for (std::size_t i = 0; i < order_indices.size(); ++i) {
      X.row(static_cast<Eigen::Index>(i)) =
          features_of(inst.orders[static_cast<std::size_t>(order_indices[i])], inst).row();
    }
    const Eigen::VectorXd tssp = l->model.predict_tssp(X);
    for (std::size_t i = 0; i < order_indices.size(); ++i) {
      const Order& ord = inst.orders[static_cast<std::size_t>(order_indices[i])];
      out[i] = destandardize(tssp(static_cast<Eigen::Index>(i)), t_sink - ord.dropoff_time,
                             l->model.t_buffer);
    }
  }
  return out;
}

int Predictor::predict_sp(const Instance& inst, int order_index, Seconds t_sink) const {
  const int idx[1] = {order_index};
  return predict_sp(inst, idx, t_sink)[0];
}

}  // namespace spd
