#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "spd/sink_prox.hpp"
#include "spd/svr.hpp"
#include "spd/trip_model.hpp"

namespace spd {

inline constexpr int kFeatureCount = 6;

// Origin and destination centroids plus pickup and drop-off time of day.
struct SpFeatures {
  double origin_lat = 0;
  double origin_lon = 0;
  double dest_lat = 0;
  double dest_lon = 0;
  Seconds pickup_tod = 0;
  Seconds dropoff_tod = 0;

  Eigen::Matrix<double, 1, kFeatureCount> row() const {
    return {origin_lat, origin_lon, dest_lat, dest_lon, pickup_tod, dropoff_tod};
  }
};

SpFeatures features_of(const Order& order, const Instance& inst);

struct SpSample {
  SpFeatures features;
  double tssp = 0;
};

// Samples for every order with a sink path, using full-instance SP.
std::vector<SpSample> training_samples(const Instance& inst, Seconds t_buffer);

// Per-feature z-scoring.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& raw) const;
};

// Regressor state for TSSP. The kernel expansion fits tssp * target_scale (SP
// per hour with the default scale) on standardized features.
struct SpModel {
  Standardizer standardizer;
  KernelExpansion<double> svr;
  Seconds t_buffer = kDefaultBuffer;
  double target_scale = 3600;

  // TSSP in SP per second.
  Eigen::VectorXd predict_tssp(const Eigen::MatrixXd& raw_features) const;
  double predict_tssp(const SpFeatures& f) const;
};

struct TrainOptions {
  Seconds t_buffer = kDefaultBuffer;
  SmoOptions smo;
};

// Reference hyperparameters.
inline SvrHyper reference_hyper() { return {KernelType::Rbf, 300, 0.01, 0.1, 3, 0}; }

SpModel train_svr(std::span<const SpSample> samples, const SvrHyper& hyper,
                  const TrainOptions& opt = {});

struct HyperGrid {
  std::vector<KernelType> kernels;
  std::vector<double> C;
  std::vector<double> gamma;
  std::vector<double> epsilon;

  std::size_t size() const { return kernels.size() * C.size() * gamma.size() * epsilon.size(); }
};

// Kernel {poly, rbf, sigmoid}; C {100..500}; gamma {0.001, 0.01, 0.1};
// epsilon {0.01, 0.05, 0.1, 0.2, 0.5}.
HyperGrid default_grid();

struct GridSearchResult {
  SvrHyper best;
  double best_score = 0;
  std::vector<std::pair<SvrHyper, double>> scores;
};

// k-fold (sample index mod k) cross-validated mean R^2 on TSSP. Ties go to
// smaller C, then larger epsilon.
GridSearchResult grid_search(std::span<const SpSample> samples, const HyperGrid& grid, int folds,
                             const TrainOptions& opt = {});

// Versioned text container; doubles are written as hex floats.
std::string serialize_model(const SpModel& m);
SpModel deserialize_model(const std::string& text);
void save_model(const SpModel& m, const std::filesystem::path& path);
SpModel load_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

class Predictor {
 public:
  struct Constant {};
  struct Oracle {
    std::vector<int> sp;  // per instance order index
  };
  struct Learned {
    SpModel model;
  };

  static Predictor constant() { return Predictor(Constant{}); }
  // Exact SP from the full-horizon network of inst.
  static Predictor oracle(const Instance& inst);
  static Predictor learned(SpModel model) { return Predictor(Learned{std::move(model)}); }

  bool is_constant() const { return std::holds_alternative<Constant>(v_); }
  bool is_oracle() const { return std::holds_alternative<Oracle>(v_); }
  bool is_learned() const { return std::holds_alternative<Learned>(v_); }
  const SpModel& model() const { return std::get<Learned>(v_).model; }
  std::string name() const;

  // Predicted integer SP for the given instance order indices. t_sink is the
  // sink time of inst (see sink_time).
  std::vector<int> predict_sp(const Instance& inst, std::span<const int> order_indices,
                              Seconds t_sink) const;
  int predict_sp(const Instance& inst, int order_index, Seconds t_sink) const;

 private:
  explicit Predictor(std::variant<Constant, Oracle, Learned> v) : v_(std::move(v)) {}
  std::variant<Constant, Oracle, Learned> v_;
};

}  // namespace spd
