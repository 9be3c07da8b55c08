#pragma once

#include "nexg/approximator.hpp"
#include "nexg/dataset.hpp"

#include <json.hpp>

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace nexg {

enum class Optimizer { sgd, adam };

struct TrainingConfig {
  Optimizer optimizer = Optimizer::adam;
  double learning_rate = 1e-3;
  double momentum = 0.9;  // sgd only
  int epochs = 40;
  int batch_size = 64;
  int hidden_width = 512;
  double train_fraction = 0.9;  // used by the single-dataset overload
  std::uint64_t seed = 0;
};

struct TrainingReport {
  double mse = 0.0;          // held-out mean ||pred - d_hat||^2
  double mre_percent = 0.0;  // held-out mean ||pred - d_hat|| * 100
  double train_mse = 0.0;
  double train_loss = 0.0;   // final-epoch mean absolute error
  int epochs_run = 0;
  double wall_time_s = 0.0;  // timing only; excluded from equality

  bool operator==(const TrainingReport& o) const {
    return mse == o.mse && mre_percent == o.mre_percent && train_mse == o.train_mse &&
           train_loss == o.train_loss && epochs_run == o.epochs_run;
  }
};

/// Input x_t ++ v_hat ++ t  ->  Gaussian RBF layer  ->  ReLU  ->  ReLU  ->  linear (n).
///
/// RBF unit j computes exp(-||input - c_j||^2 / w_j^2). Time enters scaled by
/// 1/t_scale (t_scale = T*h); states are standardized with the training-set
/// mean and standard deviation.
class MLPModel : public DirectionalApproximator {
 public:
  enum Param { kCenters = 0, kWidths, kW1, kB1, kW2, kB2, kWout, kBout, kNumParams };

  MLPModel() = default;
  /// Randomly initialized network; centers drawn from `inputs` (columns, already normalized).
  MLPModel(int state_dim, int hidden_width, const Matrix& inputs, std::mt19937_64& rng);
  /// Takes ownership of parameter blocks ordered as Param; validates shapes.
  MLPModel(int state_dim, std::vector<Matrix> params);

  int state_dim() const { return n_; }
  int input_dim() const { return 2 * n_ + 1; }
  int hidden_width() const { return static_cast<int>(params_[kWidths].rows()); }

  std::string system_name;
  SensitivityKind kind = SensitivityKind::inverse;
  double t_scale = 1.0;
  Vector x_offset;
  Vector x_scale;

  /// Column for the network input.
  Vector make_input(const Vector& state, const Vector& v_hat, double t) const;
  Matrix make_inputs(const std::vector<SampleTuple>& tuples, std::size_t begin, std::size_t end) const;

  /// Raw (unnormalized) outputs for input columns.
  Matrix forward(const Matrix& inputs) const;

  /// Mean absolute error of forward(inputs) against `labels`; fills `grads`
  /// (same shapes as params()) with its gradient.
  double loss_and_gradient(const Matrix& inputs, const Matrix& labels, std::vector<Matrix>& grads) const;
  double loss(const Matrix& inputs, const Matrix& labels) const;

  std::vector<Matrix>& params() { return params_; }
  const std::vector<Matrix>& params() const { return params_; }

  Vector predict(const Vector& state, const Vector& v_hat, double t) const override;
  ApproximatorInfo info() const override { return {system_name, kind, false}; }

 private:
  int n_ = 0;
  std::vector<Matrix> params_;
};

/// Held-out metrics for any approximator on labelled tuples.
struct EvalMetrics {
  double mse = 0.0;
  double mre_percent = 0.0;
  std::size_t count = 0;
};
EvalMetrics evaluate(const DirectionalApproximator& approx, const std::vector<SampleTuple>& tuples);
/// Batched variant for trained models.
EvalMetrics evaluate(const MLPModel& model, const std::vector<SampleTuple>& tuples);

/// Mini-batch training on `train_set`, metrics on `test_set`. Deterministic in config.seed.
std::pair<MLPModel, TrainingReport> train(const SensitivityDataset& train_set, const SensitivityDataset& test_set,
                                          const TrainingConfig& config);
/// Splits `dataset` with config.train_fraction and config.seed first.
std::pair<MLPModel, TrainingReport> train(const SensitivityDataset& dataset, const TrainingConfig& config);

inline constexpr const char* kModelFormatVersion = "nexg-model/1";

void save_model(const MLPModel& model, const std::string& path);
/// Throws ParseError naming the offending field; never returns a partial model.
MLPModel load_model(const std::string& path);
nlohmann::json model_to_json(const MLPModel& model);
MLPModel model_from_json(const nlohmann::json& j);

}  // namespace nexg
