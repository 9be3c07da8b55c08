#include "gradient_check.hpp"
#include "oracles.hpp"

#include "nexg/catalog.hpp"
#include "nexg/dataset.hpp"
#include "nexg/errors.hpp"
#include "nexg/json_util.hpp"
#include "nexg/mlp.hpp"
#include "nexg/sensitivity.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace nexg;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("nexg_mlp_" + name)).string();
}

SensitivityDataset small_dataset(const std::string& system, int anchors, int neighbors, int subsample,
                                 SensitivityKind kind = SensitivityKind::inverse) {
  const auto sys = catalog::by_name(system);
  GenerationConfig c;
  c.num_anchors = anchors;
  c.num_neighbors = neighbors;
  c.time_subsample = subsample;
  c.kind = kind;
  c.seed = 21;
  return generate_dataset(sys, *sys.initial_set, c);
}

TrainingConfig quick_config(int epochs, int width = 64) {
  TrainingConfig c;
  c.epochs = epochs;
  c.hidden_width = width;
  c.batch_size = 32;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("gradient check: every layer kind") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto check = oracle::check_gradients(seed);
    REQUIRE(check.relative_error.size() == MLPModel::kNumParams);
    for (std::size_t b = 0; b < check.relative_error.size(); ++b) {
      CAPTURE(b);
      CHECK(check.relative_error[b] <= 1e-4);
    }
  }
}

TEST_CASE("architecture and RBF initialization") {
  std::mt19937_64 rng(4);
  Matrix inputs = Matrix::Random(5, 40);
  MLPModel m(2, 512, inputs, rng);
  CHECK(m.input_dim() == 5);
  CHECK(m.hidden_width() == 512);
  const auto& p = m.params();
  CHECK(p[MLPModel::kCenters].rows() == 512);
  CHECK(p[MLPModel::kCenters].cols() == 5);
  CHECK(p[MLPModel::kW1].rows() == 512);
  CHECK(p[MLPModel::kW2].cols() == 512);
  CHECK(p[MLPModel::kWout].rows() == 2);
  CHECK((p[MLPModel::kWidths].array() > 0.0).all());
  // Centers are training inputs.
  for (Eigen::Index j = 0; j < 512; j += 97) {
    bool found = false;
    for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
      found = found || (p[MLPModel::kCenters].row(j).transpose() - inputs.col(c)).norm() == 0.0;
    }
    CHECK(found);
  }
}

TEST_CASE("overfit a tiny dataset") {
  auto ds = small_dataset("vanderpol", 2, 2, 50);
  ds.tuples.resize(20);
  TrainingConfig c = quick_config(2000, 512);
  c.batch_size = 20;
  const auto [model, report] = train(ds, ds, c);
  CHECK(report.train_mse < 1e-3);
  CHECK(report.epochs_run == 2000);
}

TEST_CASE("training is deterministic per seed") {
  const auto ds = small_dataset("damped_oscillator", 3, 3, 10);
  const auto a = train(ds, quick_config(3));
  const auto b = train(ds, quick_config(3));
  CHECK(a.second == b.second);
  for (std::size_t i = 0; i < a.first.params().size(); ++i) CHECK(a.first.params()[i] == b.first.params()[i]);
  TrainingConfig other = quick_config(3);
  other.seed = 4;
  CHECK_FALSE(train(ds, other).second == a.second);
}

TEST_CASE("training report metrics match evaluate") {
  const auto ds = small_dataset("vanderpol", 4, 3, 10);
  const auto [train_set, test_set] = split_dataset(ds, 0.9, 1);
  const auto [model, report] = train(train_set, test_set, quick_config(4));
  const EvalMetrics m = evaluate(model, test_set.tuples);
  CHECK(report.mse == doctest::Approx(m.mse).epsilon(1e-12));
  CHECK(report.mre_percent == doctest::Approx(m.mre_percent).epsilon(1e-12));
  CHECK(report.mse >= 0.0);
  // Direct per-tuple computation.
  double mse = 0.0, mre = 0.0;
  for (const auto& t : test_set.tuples) {
    const Vector e = model.predict(t.x_t, t.v_hat, t.t) - t.d_hat;
    mse += e.squaredNorm();
    mre += e.norm() * 100.0;
  }
  const double n = static_cast<double>(test_set.tuples.size());
  CHECK(m.mse == doctest::Approx(mse / n).epsilon(1e-9));
  CHECK(m.mre_percent == doctest::Approx(mre / n).epsilon(1e-9));
  const EvalMetrics generic = evaluate(static_cast<const DirectionalApproximator&>(model), test_set.tuples);
  CHECK(generic.mse == doctest::Approx(m.mse).epsilon(1e-9));
}

TEST_CASE("training errors") {
  auto ds = small_dataset("vanderpol", 2, 2, 50);
  SensitivityDataset empty = ds;
  empty.tuples.clear();
  CHECK_THROWS_AS(train(empty, ds, quick_config(1)), InputError);
  TrainingConfig bad = quick_config(1);
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(train(ds, ds, bad), InputError);
  SensitivityDataset mixed = ds;
  mixed.tuples[0].kind = SensitivityKind::forward;
  CHECK_THROWS_AS(train(mixed, ds, quick_config(1)), InputError);

  TrainingConfig explode = quick_config(50);
  explode.optimizer = Optimizer::sgd;
  explode.learning_rate = 1e300;
  try {
    train(ds, ds, explode);
    FAIL("expected divergence");
  } catch (const TrainingDivergedError& e) {
    CHECK(e.last_stable_epoch() >= 0);
  }
}

TEST_CASE("oracle wrappers") {
  const ExactInverseOracle cf(catalog::constant_field());
  Vector v(2);
  v << 0.6, -0.8;
  CHECK((cf.predict(Vector::Zero(2), v, 1.0) - v).norm() < 1e-9);
  CHECK(cf.info().is_oracle);

  const auto rot = catalog::rotation();
  const ExactInverseOracle inv(rot);
  Matrix a(2, 2);
  a << 0, 1, -1, 0;
  for (double t : {0.5, 1.57, 2.5}) {
    Vector x(2);
    x << 0.7, 0.1;
    CHECK((inv.predict(x, v, t) - oracle::expm(-a * t) * v).norm() < 1e-4);
  }
  CHECK_THROWS_AS(inv.predict(Vector::Zero(2), 2.0 * v, 1.0), InputError);

  const ExactForwardOracle fwd(rot);
  CHECK((fwd.predict(Vector::Zero(2), v, 1.0) - oracle::expm(a * 1.0) * v).norm() < 1e-4);
  CHECK(fwd.info().kind == SensitivityKind::forward);
}

TEST_CASE("oracle fidelity against the inverse-sensitivity oracle") {
  for (const auto& name : catalog::names()) {
    CAPTURE(name);
    const auto sys = catalog::by_name(name);
    const ExactInverseOracle o(sys);
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 10; ++rep) {
      const int k = std::uniform_int_distribution<int>(1, sys.max_steps)(rng);
      const Vector x_t = simulate(sys, sys.initial_set->sample(rng), k).final_state();
      const Vector v_hat = random_unit_vector(sys.dimension, rng);
      const Vector a = o.predict(x_t, v_hat, k * sys.h);
      const Vector b = inverse_sensitivity_oracle(sys, x_t, 1e-6 * v_hat, k * sys.h).normalized();
      CHECK(std::acos(std::min(1.0, a.dot(b))) <= 1e-3);
    }
  }
}

TEST_CASE("degenerate predictions") {
  CHECK_THROWS_AS(normalize_prediction(Vector::Zero(3)), DegeneratePredictionError);
  std::mt19937_64 rng(1);
  MLPModel m(2, 8, Matrix::Random(5, 10), rng);
  m.params()[MLPModel::kWout].setZero();
  m.params()[MLPModel::kBout].setZero();
  Vector v(2);
  v << 1, 0;
  CHECK_THROWS_AS(m.predict(Vector::Zero(2), v, 0.5), DegeneratePredictionError);
}

TEST_CASE("trained model outputs are unit norm") {
  const auto ds = small_dataset("damped_oscillator", 3, 3, 10);
  const auto model = train(ds, quick_config(2)).first;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Vector x(2);
    x << u(rng), u(rng);
    const Vector d = model.predict(x, random_unit_vector(2, rng), std::abs(u(rng)));
    worst = std::max(worst, std::abs(d.norm() - 1.0));
  }
  CHECK(worst <= 1e-6);
  CHECK_THROWS_AS(model.predict(Vector::Zero(3), Vector::Zero(3), 0.0), InputError);
}

TEST_CASE("model files") {
  const auto ds = small_dataset("poly3d", 3, 2, 25, SensitivityKind::forward);
  const auto model = train(ds, quick_config(2, 16)).first;
  const std::string path = temp_path("model.json");
  save_model(model, path);
  const MLPModel back = load_model(path);
  CHECK(back.kind == SensitivityKind::forward);
  CHECK(back.system_name == "poly3d");
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const Vector x = ds.theta.sample(rng);
    const Vector v = random_unit_vector(3, rng);
    const double t = std::uniform_real_distribution<double>(0.0, 2.5)(rng);
    CHECK((back.predict(x, v, t) - model.predict(x, v, t)).norm() == 0.0);
  }

  auto j = json_util::read_file(path);
  j["version"] = "nexg-model/0";
  json_util::write_file(j, temp_path("old.json"));
  try {
    load_model(temp_path("old.json"));
    FAIL("expected version rejection");
  } catch (const ParseError& e) {
    CHECK(e.field_path() == "version");
    CHECK(std::string(e.what()).find("nexg-model/0") != std::string::npos);
  }

  std::ifstream in(path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  {
    std::ofstream out(temp_path("trunc.json"));
    out << text.substr(0, text.size() / 2);
  }
  CHECK_THROWS_AS(load_model(temp_path("trunc.json")), ParseError);

  auto k = json_util::read_file(path);
  k["layers"][2]["weights"][0][0] = "x";
  json_util::write_file(k, temp_path("badfield.json"));
  try {
    load_model(temp_path("badfield.json"));
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.field_path() == "layers[2].weights[0][0]");
  }
}

TEST_CASE("quality gate on the 3-D system") {
  const auto sys = catalog::poly3d();
  GenerationConfig c;  // default generation parameters
  c.seed = 5;
  const auto ds = generate_dataset(sys, *sys.initial_set, c);
  TrainingConfig tc;
  tc.epochs = 6;
  tc.seed = 5;
  const auto [model, report] = train(ds, tc);
  MESSAGE("poly3d held-out MRE " << report.mre_percent << "%");
  CHECK(report.mre_percent <= 25.0);
}
