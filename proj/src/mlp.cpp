#include "nexg/mlp.hpp"

#include "nexg/errors.hpp"
#include "nexg/json_util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace nexg {

namespace {

struct Activations {
  Matrix dist;  // squared distances to centers, H x B
  Matrix a0;    // rbf output
  Matrix z1, a1;
  Matrix z2, a2;
  Matrix out;
};

void relu_inplace(const Matrix& z, Matrix& a) { a = z.cwiseMax(0.0); }

Activations run_forward(const std::vector<Matrix>& p, const Matrix& x) {
  Activations act;
  const Matrix& c = p[MLPModel::kCenters];
  const Vector w = p[MLPModel::kWidths].col(0);
  const Eigen::Index B = x.cols();
  act.dist.noalias() = -2.0 * c * x;
  act.dist.colwise() += c.rowwise().squaredNorm();
  act.dist.rowwise() += x.colwise().squaredNorm();
  act.dist = act.dist.cwiseMax(0.0);
  const Vector inv_w2 = w.array().square().inverse();
  act.a0 = (-(act.dist.array().colwise() * inv_w2.array())).exp();
  act.z1.noalias() = p[MLPModel::kW1] * act.a0;
  act.z1.colwise() += p[MLPModel::kB1].col(0);
  relu_inplace(act.z1, act.a1);
  act.z2.noalias() = p[MLPModel::kW2] * act.a1;
  act.z2.colwise() += p[MLPModel::kB2].col(0);
  relu_inplace(act.z2, act.a2);
  act.out.noalias() = p[MLPModel::kWout] * act.a2;
  act.out.colwise() += p[MLPModel::kBout].col(0);
  (void)B;
  return act;
}

double median_pairwise_distance(const Matrix& centers) {
  std::vector<double> d;
  const Eigen::Index H = centers.rows();
  d.reserve(static_cast<std::size_t>(H * (H - 1) / 2));
  for (Eigen::Index i = 0; i < H; ++i) {
    for (Eigen::Index j = i + 1; j < H; ++j) d.push_back((centers.row(i) - centers.row(j)).norm());
  }
  if (d.empty()) return 1.0;
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid > 1e-6 ? *mid : 1.0;
}

}  // namespace

MLPModel::MLPModel(int state_dim, int hidden_width, const Matrix& inputs, std::mt19937_64& rng) : n_(state_dim) {
  if (state_dim < 1 || hidden_width < 1) throw InputError("model dimensions must be positive");
  if (inputs.rows() != 2 * state_dim + 1 || inputs.cols() < 1) throw InputError("initialization inputs have wrong shape");
  const int d = 2 * state_dim + 1;
  const int H = hidden_width;
  x_offset = Vector::Zero(n_);
  x_scale = Vector::Ones(n_);
  params_.resize(kNumParams);

  std::uniform_int_distribution<Eigen::Index> pick(0, inputs.cols() - 1);
  Matrix centers(H, d);
  for (int j = 0; j < H; ++j) centers.row(j) = inputs.col(pick(rng)).transpose();
  params_[kCenters] = centers;
  params_[kWidths] = Matrix::Constant(H, 1, median_pairwise_distance(centers));

  auto uniform = [&rng](Eigen::Index rows, Eigen::Index cols, double limit) {
    std::uniform_real_distribution<double> u(-limit, limit);
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = u(rng);
    }
    return m;
  };
  params_[kW1] = uniform(H, H, std::sqrt(6.0 / H));
  params_[kB1] = Matrix::Zero(H, 1);
  params_[kW2] = uniform(H, H, std::sqrt(6.0 / H));
  params_[kB2] = Matrix::Zero(H, 1);
  params_[kWout] = uniform(n_, H, std::sqrt(1.0 / H));
  params_[kBout] = Matrix::Zero(n_, 1);
}

MLPModel::MLPModel(int state_dim, std::vector<Matrix> params) : n_(state_dim), params_(std::move(params)) {
  if (state_dim < 1 || params_.size() != kNumParams) throw InputError("bad model parameter list");
  const Eigen::Index H = params_[kWidths].rows();
  const Eigen::Index d = 2 * state_dim + 1;
  const bool ok = params_[kCenters].rows() == H && params_[kCenters].cols() == d && params_[kWidths].cols() == 1 &&
                  params_[kW1].rows() == H && params_[kW1].cols() == H && params_[kB1].rows() == H &&
                  params_[kW2].rows() == H && params_[kW2].cols() == H && params_[kB2].rows() == H &&
                  params_[kWout].rows() == state_dim && params_[kWout].cols() == H &&
                  params_[kBout].rows() == state_dim;
  if (!ok) throw InputError("model parameter shapes do not match the architecture");
  x_offset = Vector::Zero(n_);
  x_scale = Vector::Ones(n_);
}

Vector MLPModel::make_input(const Vector& state, const Vector& v_hat, double t) const {
  if (state.size() != n_ || v_hat.size() != n_) throw InputError("approximator input has wrong dimension");
  Vector in(input_dim());
  in.head(n_) = (state - x_offset).cwiseQuotient(x_scale);
  in.segment(n_, n_) = v_hat;
  in[2 * n_] = t / t_scale;
  return in;
}

Matrix MLPModel::make_inputs(const std::vector<SampleTuple>& tuples, std::size_t begin, std::size_t end) const {
  Matrix in(input_dim(), static_cast<Eigen::Index>(end - begin));
  for (std::size_t i = begin; i < end; ++i) {
    in.col(static_cast<Eigen::Index>(i - begin)) = make_input(tuples[i].x_t, tuples[i].v_hat, tuples[i].t);
  }
  return in;
}

Matrix MLPModel::forward(const Matrix& inputs) const { return run_forward(params_, inputs).out; }

double MLPModel::loss(const Matrix& inputs, const Matrix& labels) const {
  return (forward(inputs) - labels).cwiseAbs().mean();
}

double MLPModel::loss_and_gradient(const Matrix& x, const Matrix& labels, std::vector<Matrix>& grads) const {
  const Activations act = run_forward(params_, x);
  const Matrix diff = act.out - labels;
  const double count = static_cast<double>(diff.size());
  grads.resize(kNumParams);

  // d(mean |diff|)/d out
  Matrix g_out = diff.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }) / count;
  grads[kWout].noalias() = g_out * act.a2.transpose();
  grads[kBout] = g_out.rowwise().sum();

  Matrix g2 = params_[kWout].transpose() * g_out;
  g2 = g2.cwiseProduct((act.z2.array() > 0.0).cast<double>().matrix());
  grads[kW2].noalias() = g2 * act.a1.transpose();
  grads[kB2] = g2.rowwise().sum();

  Matrix g1 = params_[kW2].transpose() * g2;
  g1 = g1.cwiseProduct((act.z1.array() > 0.0).cast<double>().matrix());
  grads[kW1].noalias() = g1 * act.a0.transpose();
  grads[kB1] = g1.rowwise().sum();

  // RBF layer: a0 = exp(-dist / w^2)
  const Matrix g0 = params_[kW1].transpose() * g1;
  const Matrix e = g0.cwiseProduct(act.a0);
  const Vector w = params_[kWidths].col(0);
  const Vector inv_w2 = w.array().square().inverse();
  grads[kWidths] = (2.0 * e.cwiseProduct(act.dist).rowwise().sum().array() / w.array().cube()).matrix();
  const Matrix g_dist = -(e.array().colwise() * inv_w2.array()).matrix();
  const Vector row_sums = g_dist.rowwise().sum();
  Matrix g_centers = g_dist * x.transpose();
  g_centers -= row_sums.asDiagonal() * params_[kCenters];
  grads[kCenters] = -2.0 * g_centers;

  return diff.cwiseAbs().mean();
}

Vector MLPModel::predict(const Vector& state, const Vector& v_hat, double t) const {
  if (std::abs(v_hat.norm() - 1.0) > 1e-6) throw InputError("perturbation direction must be unit-norm");
  return normalize_prediction(forward(make_input(state, v_hat, t)).col(0));
}

EvalMetrics evaluate(const DirectionalApproximator& approx, const std::vector<SampleTuple>& tuples) {
  EvalMetrics m;
  for (const auto& tup : tuples) {
    const double err = (approx.predict(tup.x_t, tup.v_hat, tup.t) - tup.d_hat).norm();
    m.mse += err * err;
    m.mre_percent += err;
  }
  m.count = tuples.size();
  if (m.count > 0) {
    m.mse /= static_cast<double>(m.count);
    m.mre_percent *= 100.0 / static_cast<double>(m.count);
  }
  return m;
}

EvalMetrics evaluate(const MLPModel& model, const std::vector<SampleTuple>& tuples) {
  EvalMetrics m;
  constexpr std::size_t kChunk = 1024;
  for (std::size_t b = 0; b < tuples.size(); b += kChunk) {
    const std::size_t e = std::min(tuples.size(), b + kChunk);
    const Matrix out = model.forward(model.make_inputs(tuples, b, e));
    for (std::size_t i = b; i < e; ++i) {
      const Vector pred = normalize_prediction(out.col(static_cast<Eigen::Index>(i - b)));
      const double err = (pred - tuples[i].d_hat).norm();
      m.mse += err * err;
      m.mre_percent += err;
    }
  }
  m.count = tuples.size();
  if (m.count > 0) {
    m.mse /= static_cast<double>(m.count);
    m.mre_percent *= 100.0 / static_cast<double>(m.count);
  }
  return m;
}

std::pair<MLPModel, TrainingReport> train(const SensitivityDataset& train_set, const SensitivityDataset& test_set,
                                          const TrainingConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (train_set.tuples.empty()) throw InputError("training set is empty");
  if (config.epochs < 0 || config.batch_size < 1) throw InputError("epochs must be >= 0 and batch size >= 1");
  if (!(config.learning_rate > 0.0)) throw InputError("learning rate must be positive");
  const SensitivityKind kind = train_set.tuples.front().kind;
  for (const auto& tup : train_set.tuples) {
    if (tup.kind != kind) throw InputError("training set mixes sensitivity kinds");
  }
  const int n = train_set.dimension;
  const auto& tuples = train_set.tuples;
  const std::size_t N = tuples.size();

  std::mt19937_64 rng(config.seed);

  // Standardize states with training statistics.
  Vector mean = Vector::Zero(n);
  for (const auto& tup : tuples) mean += tup.x_t;
  mean /= static_cast<double>(N);
  Vector var = Vector::Zero(n);
  for (const auto& tup : tuples) var += (tup.x_t - mean).cwiseAbs2();
  Vector scale = (var / static_cast<double>(N)).cwiseSqrt();
  for (int i = 0; i < n; ++i) {
    if (!(scale[i] > 1e-9)) scale[i] = 1.0;
  }

  double t_scale = train_set.max_steps * train_set.h;
  if (!(t_scale > 0.0)) t_scale = 1.0;
  Matrix all_inputs(2 * n + 1, static_cast<Eigen::Index>(N));
  Matrix all_labels(n, static_cast<Eigen::Index>(N));
  for (std::size_t i = 0; i < N; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    all_inputs.col(col).head(n) = (tuples[i].x_t - mean).cwiseQuotient(scale);
    all_inputs.col(col).segment(n, n) = tuples[i].v_hat;
    all_inputs(2 * n, col) = tuples[i].t / t_scale;
    all_labels.col(col) = tuples[i].d_hat;
  }

  MLPModel model(n, config.hidden_width, all_inputs, rng);
  model.system_name = train_set.system_name;
  model.kind = kind;
  model.x_offset = mean;
  model.x_scale = scale;
  model.t_scale = t_scale;

  auto& params = model.params();
  std::vector<Matrix> grads;
  std::vector<Matrix> m1(params.size()), m2(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    m1[i] = Matrix::Zero(params[i].rows(), params[i].cols());
    m2[i] = Matrix::Zero(params[i].rows(), params[i].cols());
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  long long step = 0;

  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto B = static_cast<std::size_t>(config.batch_size);
  Matrix xb, yb;
  TrainingReport report;
  int last_stable = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < N; b += B) {
      const std::size_t e = std::min(N, b + B);
      xb.resize(all_inputs.rows(), static_cast<Eigen::Index>(e - b));
      yb.resize(n, static_cast<Eigen::Index>(e - b));
      for (std::size_t i = b; i < e; ++i) {
        xb.col(static_cast<Eigen::Index>(i - b)) = all_inputs.col(static_cast<Eigen::Index>(order[i]));
        yb.col(static_cast<Eigen::Index>(i - b)) = all_labels.col(static_cast<Eigen::Index>(order[i]));
      }
      const double l = model.loss_and_gradient(xb, yb, grads);
      if (!std::isfinite(l)) {
        throw TrainingDivergedError(last_stable, "training loss became non-finite in epoch " + std::to_string(epoch));
      }
      epoch_loss += l * static_cast<double>(e - b);
      ++step;
      for (std::size_t p = 0; p < params.size(); ++p) {
        if (config.optimizer == Optimizer::adam) {
          m1[p] = kBeta1 * m1[p] + (1.0 - kBeta1) * grads[p];
          m2[p] = kBeta2 * m2[p] + (1.0 - kBeta2) * grads[p].cwiseAbs2();
          const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
          const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
          params[p].array() -=
              config.learning_rate * (m1[p].array() / c1) / ((m2[p].array() / c2).sqrt() + kEps);
        } else {
          m1[p] = config.momentum * m1[p] - config.learning_rate * grads[p];
          params[p] += m1[p];
        }
      }
      params[MLPModel::kWidths] = params[MLPModel::kWidths].cwiseAbs().cwiseMax(1e-3);
    }
    epoch_loss /= static_cast<double>(N);
    bool finite = std::isfinite(epoch_loss);
    for (const auto& p : params) finite = finite && p.allFinite();
    if (!finite) {
      throw TrainingDivergedError(last_stable, "parameters became non-finite in epoch " + std::to_string(epoch));
    }
    last_stable = epoch;
    report.train_loss = epoch_loss;
    report.epochs_run = epoch;
  }

  report.train_mse = evaluate(model, train_set.tuples).mse;
  if (!test_set.tuples.empty()) {
    const EvalMetrics held_out = evaluate(model, test_set.tuples);
    report.mse = held_out.mse;
    report.mre_percent = held_out.mre_percent;
  }
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), report};
}

std::pair<MLPModel, TrainingReport> train(const SensitivityDataset& dataset, const TrainingConfig& config) {
  auto [train_set, test_set] = split_dataset(dataset, config.train_fraction, config.seed);
  return train(train_set, test_set, config);
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json model_to_json(const MLPModel& m) {
  using json_util::to_json;
  using nlohmann::json;
  const auto& p = m.params();
  json layers = json::array();
  layers.push_back({{"type", "rbf"}, {"centers", to_json(p[MLPModel::kCenters])},
                    {"widths", to_json(Vector(p[MLPModel::kWidths].col(0)))}});
  layers.push_back({{"type", "dense"}, {"activation", "relu"}, {"weights", to_json(p[MLPModel::kW1])},
                    {"bias", to_json(Vector(p[MLPModel::kB1].col(0)))}});
  layers.push_back({{"type", "dense"}, {"activation", "relu"}, {"weights", to_json(p[MLPModel::kW2])},
                    {"bias", to_json(Vector(p[MLPModel::kB2].col(0)))}});
  layers.push_back({{"type", "dense"}, {"activation", "linear"}, {"weights", to_json(p[MLPModel::kWout])},
                    {"bias", to_json(Vector(p[MLPModel::kBout].col(0)))}});
  return json{{"version", kModelFormatVersion},
              {"system_name", m.system_name},
              {"kind", to_string(m.kind)},
              {"arch",
               {{"state_dim", m.state_dim()},
                {"input_dim", m.input_dim()},
                {"hidden_width", m.hidden_width()},
                {"layers", {"rbf", "relu", "relu", "linear"}}}},
              {"layers", layers},
              {"normalization",
               {{"t_scale", m.t_scale}, {"x_offset", to_json(m.x_offset)}, {"x_scale", to_json(m.x_scale)}}}};
}

MLPModel model_from_json(const nlohmann::json& j) {
  using namespace json_util;
  const std::string version = get_string(field(j, "version", ""), "version");
  if (version != kModelFormatVersion) {
    throw ParseError("version", "unsupported model version '" + version + "' (expected " + kModelFormatVersion + ")");
  }
  const json& arch = field(j, "arch", "");
  const int n = get_int(field(arch, "state_dim", "arch"), "arch.state_dim");
  const int H = get_int(field(arch, "hidden_width", "arch"), "arch.hidden_width");
  if (n < 1 || H < 1) throw ParseError("arch", "dimensions must be positive");
  const int d = 2 * n + 1;

  const json& layers = field(j, "layers", "");
  if (!layers.is_array() || layers.size() != 4) throw ParseError("layers", "expected exactly 4 layers");

  auto expect_shape = [](const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& path) {
    if (m.rows() != rows || m.cols() != cols) {
      throw ParseError(path, "expected shape " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  };

  std::vector<Matrix> p(MLPModel::kNumParams);
  if (get_string(field(layers[0], "type", "layers[0]"), "layers[0].type") != "rbf") {
    throw ParseError("layers[0].type", "first layer must be rbf");
  }
  p[MLPModel::kCenters] = get_matrix(field(layers[0], "centers", "layers[0]"), "layers[0].centers");
  expect_shape(p[MLPModel::kCenters], H, d, "layers[0].centers");
  p[MLPModel::kWidths] = get_vector(field(layers[0], "widths", "layers[0]"), "layers[0].widths");
  expect_shape(p[MLPModel::kWidths], H, 1, "layers[0].widths");
  for (Eigen::Index i = 0; i < H; ++i) {
    if (!(p[MLPModel::kWidths](i, 0) > 0.0)) throw ParseError("layers[0].widths", "widths must be positive");
  }

  const char* expected_act[] = {"relu", "relu", "linear"};
  const Eigen::Index rows[] = {H, H, n};
  for (int l = 1; l <= 3; ++l) {
    const std::string lp = "layers[" + std::to_string(l) + "]";
    if (get_string(field(layers[l], "type", lp), lp + ".type") != "dense") {
      throw ParseError(lp + ".type", "expected a dense layer");
    }
    if (get_string(field(layers[l], "activation", lp), lp + ".activation") != expected_act[l - 1]) {
      throw ParseError(lp + ".activation", std::string("expected ") + expected_act[l - 1]);
    }
    Matrix w = get_matrix(field(layers[l], "weights", lp), lp + ".weights");
    expect_shape(w, rows[l - 1], H, lp + ".weights");
    Matrix b = get_vector(field(layers[l], "bias", lp), lp + ".bias");
    expect_shape(b, rows[l - 1], 1, lp + ".bias");
    p[static_cast<std::size_t>(2 * l)] = std::move(w);
    p[static_cast<std::size_t>(2 * l + 1)] = std::move(b);
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!p[i].allFinite()) throw ParseError("layers", "non-finite parameter");
  }

  MLPModel m(n, std::move(p));
  m.system_name = get_string(field(j, "system_name", ""), "system_name");
  try {
    m.kind = parse_kind(get_string(field(j, "kind", ""), "kind"));
  } catch (const InputError& e) {
    throw ParseError("kind", e.what());
  }
  const json& norm = field(j, "normalization", "");
  m.t_scale = get_number(field(norm, "t_scale", "normalization"), "normalization.t_scale");
  if (!(m.t_scale > 0.0)) throw ParseError("normalization.t_scale", "must be positive");
  if (const json* off = optional_field(norm, "x_offset")) {
    m.x_offset = get_vector(*off, "normalization.x_offset");
    if (m.x_offset.size() != n) throw ParseError("normalization.x_offset", "wrong length");
  }
  if (const json* sc = optional_field(norm, "x_scale")) {
    m.x_scale = get_vector(*sc, "normalization.x_scale");
    if (m.x_scale.size() != n) throw ParseError("normalization.x_scale", "wrong length");
    for (int i = 0; i < n; ++i) {
      if (!(m.x_scale[i] > 0.0)) throw ParseError("normalization.x_scale", "must be positive");
    }
  }
  return m;
}

void save_model(const MLPModel& model, const std::string& path) { json_util::write_file(model_to_json(model), path); }

MLPModel load_model(const std::string& path) { return model_from_json(json_util::read_file(path)); }

}  // namespace nexg
