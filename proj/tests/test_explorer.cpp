#include "oracles.hpp"

#include "nexg/catalog.hpp"
#include "nexg/errors.hpp"
#include "nexg/explorer.hpp"
#include "nexg/mlp.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>

using namespace nexg;

namespace {

Vector vec(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Matrix damped_generator() {
  Matrix a(2, 2);
  a << 0, 1, -1, -0.4;
  return a;
}

Box wide_box(int n) { return Box(Vector::Constant(n, -50.0), Vector::Constant(n, 50.0)); }

/// Identity direction with no simulation behind it.
class IdentityDirection : public DirectionalApproximator {
 public:
  Vector predict(const Vector&, const Vector& v_hat, double) const override { return v_hat; }
  ApproximatorInfo info() const override { return {"constant_field", SensitivityKind::inverse, false}; }
};

class ZeroDirection : public DirectionalApproximator {
 public:
  Vector predict(const Vector& state, const Vector&, double) const override {
    return normalize_prediction(Vector::Zero(state.size()));
  }
  ApproximatorInfo info() const override { return {"", SensitivityKind::inverse, false}; }
};

RDParams params(double s, int p, int bound = 30, double delta = 0.004) {
  RDParams r;
  r.s = s;
  r.p = p;
  r.bound = bound;
  r.delta = delta;
  return r;
}

}  // namespace

TEST_CASE("toy constant field: exact contraction by 1 - s") {
  const auto sys = catalog::constant_field();
  const ExactInverseOracle o(sys);
  const Trajectory anchor = simulate(sys, vec(-0.5, 0), 100);
  const Vector z = anchor[100] + vec(1, 0);
  const RDResult r = reach_destination(sys, o, anchor, z, 1.0, *sys.initial_set, params(0.5, 1));
  CHECK(r.d_init == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.k == 8);
  CHECK(r.k == static_cast<int>(std::ceil(std::log2(1.0 / 0.004))));
  CHECK(r.status == RDStatus::reached);
  REQUIRE(r.log.size() == 9);
  for (int k = 0; k <= 8; ++k) CHECK(std::abs(r.log[static_cast<std::size_t>(k)].d_a - std::pow(0.5, k)) <= 1e-9);
  CHECK(r.d_r == doctest::Approx(r.d_a / r.d_init));
}

TEST_CASE("destination already reached") {
  const auto sys = catalog::vanderpol();
  const ExactInverseOracle o(sys);
  const Trajectory anchor = simulate(sys, vec(0.8, 0.1), 120);
  const RDResult r = reach_destination(sys, o, anchor, anchor[120], 1.2, *sys.initial_set, params(0.5, 2));
  CHECK(r.k == 0);
  CHECK(r.d_a == 0.0);
  CHECK(r.d_r == 0.0);
  CHECK(r.log.size() == 1);
  CHECK(r.simulations == 0);
}

TEST_CASE("linear plant: iteration counts follow the closed form") {
  const auto sys = oracle::linear_system(damped_generator(), wide_box(2));
  const ExactInverseOracle o(sys);
  const Trajectory anchor = simulate(sys, vec(0.75, 0), 100);
  const Vector z = anchor[100] + vec(0.6, -0.8);
  std::map<std::pair<double, int>, int> measured;
  for (double s : {0.01, 0.1}) {
    for (int p : {1, 5, 10}) {
      CAPTURE(s);
      CAPTURE(p);
      const RDResult r = reach_destination(sys, o, anchor, z, 1.0, *sys.initial_set, params(s, p, 2000));
      const double rate = 1.0 - s * p;
      const int expected =
          rate <= 0.0 ? 1 : static_cast<int>(std::ceil(std::log(r.d_init / 0.004) / -std::log(rate)));
      CHECK(std::abs(r.k - expected) <= 1);
      CHECK(r.status == RDStatus::reached);
      measured[{s, p}] = r.k;
    }
  }
  const double ratio = static_cast<double>(measured[{0.01, 1}]) / measured[{0.1, 1}];
  CHECK(std::abs(ratio - 10.0) <= 1.5);
}

TEST_CASE("monotone progress with the exact oracle") {
  for (const auto& name : catalog::names()) {
    CAPTURE(name);
    const auto sys = catalog::by_name(name);
    const ExactInverseOracle o(sys);
    std::mt19937_64 rng(2);
    const int idx = 150;
    const Trajectory anchor = simulate(sys, sys.initial_set->sample(rng), idx);
    const Vector z = simulate(sys, sys.initial_set->sample(rng), idx).final_state();
    for (auto [s, p] : {std::pair{0.5, 1}, std::pair{0.25, 2}, std::pair{0.2, 5}}) {
      const RDResult r = reach_destination(sys, o, anchor, z, idx * sys.h, wide_box(sys.dimension),
                                           params(s, p, 40, 1e-9));
      for (std::size_t k = 1; k < r.log.size(); ++k) {
        CHECK(r.log[k].d_a <= (1.0 - s * p) * r.log[k - 1].d_a + 1e-6 * r.d_init);
      }
    }
  }
}

TEST_CASE("equal s*p gives equal iteration counts") {
  const auto sys = catalog::vanderpol();
  const ExactInverseOracle o(sys);
  const Trajectory anchor = simulate(sys, vec(0.6, 0.0), 200);
  const Vector z = simulate(sys, vec(0.9, 0.2), 200).final_state();
  const int a = reach_destination(sys, o, anchor, z, 2.0, *sys.initial_set, params(0.5, 1)).k;
  const int b = reach_destination(sys, o, anchor, z, 2.0, *sys.initial_set, params(0.25, 2)).k;
  const int c = reach_destination(sys, o, anchor, z, 2.0, *sys.initial_set, params(0.1, 5)).k;
  CHECK(std::abs(a - b) <= 1);
  CHECK(std::abs(a - c) <= 1);
}

TEST_CASE("logged initial states stay in theta") {
  const auto sys = catalog::damped_oscillator();
  const ExactInverseOracle o(sys);
  const Box theta = *sys.initial_set;
  const Trajectory anchor = simulate(sys, theta.center(), 150);
  const Vector z = anchor[150] + vec(3, 3);  // unreachable: forces projection
  const RDResult r = reach_destination(sys, o, anchor, z, 1.5, theta, params(0.5, 2, 15));
  CHECK(r.status == RDStatus::bound_exhausted);
  CHECK(r.k == 15);
  for (const auto& it : r.log) CHECK(theta.contains(it.x0));
  const auto& best = r.log[static_cast<std::size_t>(r.best_index)];
  for (const auto& it : r.log) CHECK(best.d_a <= it.d_a);
}

TEST_CASE("simulation accounting") {
  std::atomic<long> calls{0};
  ClosedLoopSystem sys;
  sys.name = "counted";
  sys.dimension = 2;
  sys.plant = CustomPlant{0, [&calls](const Vector&, const Vector&) {
                            ++calls;
                            return vec(1, 0);
                          }};
  sys.h = 0.01;
  sys.max_steps = 100;
  const Box theta = wide_box(2);
  const Trajectory anchor = simulate(sys, vec(0, 0), 60);
  calls = 0;
  const IdentityDirection approx;
  const RDResult r = reach_destination(sys, approx, anchor, anchor[40] + vec(0.3, 0.4), 0.4, theta, params(0.5, 1));
  CHECK(r.k > 0);
  CHECK(calls.load() == 4L * 60L * r.k);
  CHECK(r.simulations == r.k);
}

TEST_CASE("directional step rule scales by s * |v|") {
  // With v = s w and increment s |v| v_hat, each outer step removes s^2 of the gap.
  const auto sys = catalog::constant_field();
  const IdentityDirection approx;
  const Trajectory anchor = simulate(sys, vec(0, 0), 100);
  const RDResult r = reach_destination(sys, approx, anchor, anchor[100] + vec(0.5, 0), 1.0, *sys.initial_set,
                                       params(0.5, 1, 10, 1e-9));
  for (std::size_t k = 0; k < r.log.size(); ++k) CHECK(std::abs(r.log[k].d_a - 0.5 * std::pow(0.75, k)) < 1e-9);

  RDParams forced = params(0.5, 1);
  forced.step_rule = StepRule::exact_vector;
  CHECK_THROWS_AS(reach_destination(sys, approx, anchor, anchor[100] + vec(0.5, 0), 1.0, *sys.initial_set, forced),
                  InputError);
  const ExactInverseOracle oracle(sys);
  RDParams directional = params(0.5, 1, 10, 1e-9);
  directional.step_rule = StepRule::directional;
  const RDResult d = reach_destination(sys, oracle, anchor, anchor[100] + vec(0.5, 0), 1.0, *sys.initial_set,
                                       directional);
  CHECK(std::abs(d.log[3].d_a - 0.5 * std::pow(0.75, 3)) < 1e-9);
}

TEST_CASE("axis-aligned policy") {
  CHECK((axis_aligned_direction(vec(0.9, 0.1)) - vec(1, 0)).norm() == 0.0);
  CHECK((axis_aligned_direction(vec(-0.2, -0.8)) - vec(0, -1)).norm() == 0.0);
  CHECK((axis_aligned_direction(vec(0.5, 0.5)) - vec(1, 0)).norm() == 0.0);
  CHECK((axis_aligned_direction(vec(-0.5, 0.5)) - vec(-1, 0)).norm() == 0.0);
  CHECK_THROWS_AS(axis_aligned_direction(vec(0, 0)), InputError);
  CHECK(parse_policy("axis") == DirectionPolicy::axis_aligned);
  CHECK(parse_policy("straight") == DirectionPolicy::straight_line);
  CHECK_THROWS_AS(parse_policy("spiral"), InputError);

  const auto sys = catalog::constant_field();
  const ExactInverseOracle o(sys);
  const Trajectory anchor = simulate(sys, vec(0, 0), 100);
  RDParams p = params(0.5, 1, 60);
  p.policy = DirectionPolicy::axis_aligned;
  const RDResult r = reach_destination(sys, o, anchor, anchor[100] + vec(0.3, -0.2), 1.0, *sys.initial_set, p);
  CHECK(r.status == RDStatus::reached);
  for (std::size_t k = 1; k < r.log.size(); ++k) {
    const Vector step = r.log[k].x0 - r.log[k - 1].x0;
    CHECK((std::abs(step[0]) < 1e-12 || std::abs(step[1]) < 1e-12));
  }
}

TEST_CASE("project_to_box") {
  const Box unit(vec(0, 0), vec(1, 1));
  CHECK((project_to_box(vec(0.2, 0.7), unit) - vec(0.2, 0.7)).norm() == 0.0);
  CHECK((project_to_box(vec(2, 0.3), unit) - vec(1, 0.3)).norm() == 0.0);
  const Box b(vec(-1, 0.5), vec(0.5, 2));
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  const int per_axis = 301;
  for (int i = 0; i < 1000; ++i) {
    const Vector x = vec(u(rng), u(rng));
    const Vector grid = oracle::grid_projection(x, b, per_axis);
    const double resolution = b.widths().maxCoeff() / (per_axis - 1);
    CHECK((project_to_box(x, b) - grid).norm() <= resolution);
  }
  CHECK_THROWS_AS(project_to_box(Vector::Zero(3), unit), InputError);
}

TEST_CASE("reach_extreme on a linear plant matches the support function") {
  const Matrix a = damped_generator();
  const Box theta(vec(0.5, -0.25), vec(1.0, 0.25));
  const auto sys = oracle::linear_system(a, theta);
  const ExactInverseOracle o(sys);
  const double t = 0.8;
  const int idx = 80;
  const Trajectory anchor = simulate(sys, theta.center(), idx);
  const Matrix fwd = oracle::expm(a * t);
  const Matrix bwd = oracle::expm(-a * t);
  double diameter = 0.0;
  for (const auto& c1 : theta.corners()) {
    for (const auto& c2 : theta.corners()) diameter = std::max(diameter, (fwd * (c1 - c2)).norm());
  }
  const std::vector<Vector> dirs = {vec(1, 0), vec(-1, 0), vec(0, 1), vec(0, -1)};
  for (const auto& d : dirs) {
    CAPTURE(d.transpose());
    // Precondition: the initial-state direction pushed by the steps and the
    // support vertex of the mapped box select the same corner.
    const Vector pushed = bwd * d;
    const Vector support_dir = fwd.transpose() * d;
    REQUIRE((pushed.array().sign() == support_dir.array().sign()).all());
    const ExtremePoint e = reach_extreme(sys, o, anchor, t, d, theta, params(0.5, 2));
    const double support = oracle::linear_support(a, t, theta, d);
    CHECK(std::abs(d.dot(e.x_t) - support) <= 0.02 * diameter);
    CHECK(theta.contains(e.x0));
  }
  const ExtremePoint up = reach_extreme(sys, o, anchor, t, vec(1, 0), theta, params(0.5, 2));
  const ExtremePoint down = reach_extreme(sys, o, anchor, t, vec(-1, 0), theta, params(0.5, 2));
  CHECK(up.x_t[0] > anchor[idx][0]);
  CHECK(down.x_t[0] < anchor[idx][0]);
}

TEST_CASE("reach_extreme with a single-point theta") {
  const auto sys = catalog::vanderpol();
  const ExactInverseOracle o(sys);
  const Box point(vec(0.7, 0.1), vec(0.7, 0.1));
  const Trajectory anchor = simulate(sys, vec(0.7, 0.1), 100);
  const ExtremePoint e = reach_extreme(sys, o, anchor, 1.0, vec(0, 1), point, params(0.5, 2));
  CHECK((e.x_t - anchor[100]).norm() == 0.0);
  CHECK(e.corrections == 0);
}

TEST_CASE("coverage of the true reachable set") {
  const auto sys = catalog::damped_oscillator();
  const Box theta = *sys.initial_set;
  const ExactInverseOracle o(sys);
  std::mt19937_64 rng(12);
  const int idx = 150;
  const Trajectory anchor = simulate(sys, theta.sample(rng), idx);
  std::vector<Vector> targets;
  for (int i = 0; i < 40; ++i) targets.push_back(simulate(sys, theta.sample(rng), idx).final_state());
  const auto report = coverage_for_targets(sys, o, theta, anchor, 1.5, targets, params(0.5, 2), 2);
  CHECK(report.coverage_fraction >= 0.95);
  CHECK(report.reached.size() == 40);
  std::size_t hits = 0;
  for (bool b : report.reached) hits += b ? 1 : 0;
  CHECK(report.coverage_fraction == doctest::Approx(hits / 40.0));

  const auto single = coverage_for_targets(sys, o, theta, anchor, 1.5, {anchor[idx]}, params(0.5, 2));
  CHECK(single.coverage_fraction == 1.0);
}

TEST_CASE("coverage polygon and determinism") {
  const auto sys = catalog::vanderpol();
  const ExactInverseOracle o(sys);
  const auto a = coverage(sys, o, *sys.initial_set, 1.0, 12, params(0.5, 2), 4, 1);
  const auto b = coverage(sys, o, *sys.initial_set, 1.0, 12, params(0.5, 2), 4, 3);
  CHECK(a.template_directions.size() == 4);
  CHECK(a.polygon_vertices.size() == 4);
  CHECK(a.sampled_targets.size() == 12);
  CHECK(a.support_values == b.support_values);
  CHECK(a.final_distances == b.final_distances);
  CHECK(a.reached == b.reached);
  // Targets lie in the polygon.
  Box z(a.polygon_vertices.front(), a.polygon_vertices.front());
  for (const auto& v : a.polygon_vertices) {
    z.lo = z.lo.cwiseMin(v);
    z.hi = z.hi.cwiseMax(v);
  }
  for (const auto& t : a.sampled_targets) CHECK(z.contains(t, 1e-12));
  CHECK_THROWS_AS(coverage(sys, o, *sys.initial_set, 1.0, 0, params(0.5, 2), 4), InputError);
}

TEST_CASE("convergence bound and k*") {
  const auto exact = ConvergenceParams::from_rates(1.0, 0.0);
  CHECK(convergence_bound(1.0, 0.5, 1, exact, 3) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(k_star(0.43, 0.004, 0.01, 1, exact) == static_cast<int>(std::ceil(std::log(107.5) / -std::log(0.99))));
  CHECK(k_star(0.43, 0.004, 0.01, 1, exact) == 466);
  CHECK(k_star(1.0, 0.004, 0.5, 1, exact) == 8);
  CHECK(k_star(0.001, 0.004, 0.5, 1, exact) == 0);
  const auto noisy = ConvergenceParams::from_rates(0.9, 0.0005);
  CHECK(convergence_bound(1.0, 0.1, 1, noisy, 10) == doctest::Approx(std::pow(0.91, 10) + 0.005).epsilon(1e-12));
  CHECK(convergence_bound(1.0, 0.1, 1, noisy, 10) == doctest::Approx(0.3944).epsilon(1e-4));
  CHECK_THROWS_AS(k_star(1.0, 0.004, 0.1, 1, noisy), NoGuaranteeError);
  CHECK_THROWS_AS(convergence_bound(1.0, 0.5, 2, exact, 1), InputError);
  CHECK_THROWS_AS(convergence_bound(1.0, 0.5, 1, exact, -1), InputError);

  const auto cp = ConvergenceParams::from_errors(0.05, 1e-4, 0.8, 1.6);
  CHECK(cp.gamma == doctest::Approx(0.9));
  CHECK(cp.r_eps == doctest::Approx(1e-4 * 1.6 / 0.9));
  CHECK_THROWS_AS(ConvergenceParams::from_errors(0.6, 0.0, 1.0, 2.0), InputError);
}

TEST_CASE("convergence bound holds under injected error") {
  const Matrix a = damped_generator();
  const auto sys = oracle::linear_system(a, wide_box(2));
  const double t = 1.0;
  const auto [eta1, eta2] = oracle::discrepancy_witnesses(a, t);
  const Trajectory anchor = simulate(sys, vec(0.75, 0), 100);
  const Vector z = anchor[100] + vec(0.8, 0.6);
  for (auto [er, ea] : {std::pair{0.05, 0.0}, std::pair{0.0, 1e-4}, std::pair{0.05, 1e-4}}) {
    const auto cp = ConvergenceParams::from_errors(er, ea, eta1, eta2);
    const double s = 0.3;
    REQUIRE(s >= cp.r_eps / 1.0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const oracle::CorruptedOracle noisy(sys, er, ea, seed);
      const RDResult r = reach_destination(sys, noisy, anchor, z, t, *sys.initial_set, params(s, 1, 50, 1e-12));
      for (std::size_t k = 0; k < r.log.size(); ++k) {
        CHECK(r.log[k].d_a <= convergence_bound(r.d_init, s, 1, cp, static_cast<int>(k)) + 1e-6);
      }
    }
  }
}

TEST_CASE("reach_destination errors and partial results") {
  const auto sys = catalog::vanderpol();
  const ExactInverseOracle o(sys);
  const Trajectory anchor = simulate(sys, vec(0.7, 0.0), 50);
  const Box theta = *sys.initial_set;
  CHECK_THROWS_AS(reach_destination(sys, o, anchor, vec(0, 0), 0.8, theta, params(0.5, 2)), InputError);
  const Trajectory outside = simulate(sys, vec(3, 3), 50);
  CHECK_THROWS_AS(reach_destination(sys, o, outside, vec(0, 0), 0.3, theta, params(0.5, 2)), InputError);
  const Trajectory wrong_dim = simulate(catalog::poly3d(), Vector::Constant(3, 0.5), 50);
  CHECK_THROWS_AS(reach_destination(sys, o, wrong_dim, vec(0, 0), 0.3, theta, params(0.5, 2)), InputError);
  CHECK_THROWS_AS(reach_destination(sys, o, anchor, vec(0, 0), 0.3, theta, params(0.0, 2)), InputError);
  CHECK_THROWS_AS(reach_destination(sys, o, anchor, vec(0, 0), 0.3, theta, params(0.5, 0)), InputError);
  CHECK_THROWS_AS(reach_destination(sys, o, anchor, vec(NAN, 0), 0.3, theta, params(0.5, 2)), InputError);

  const ZeroDirection zero;
  const RDResult r = reach_destination(sys, zero, anchor, anchor[30] + vec(0.1, 0), 0.3, theta, params(0.5, 2));
  CHECK(r.status == RDStatus::degenerate_prediction);
  CHECK(r.k == 0);
  CHECK(r.log.size() == 1);
}

TEST_CASE("predict_trajectory") {
  const auto cf = catalog::constant_field();
  const ExactForwardOracle fwd(cf);
  const Trajectory anchor = simulate(cf, vec(0, 0), 100);
  const Trajectory same = predict_trajectory(fwd, anchor, anchor.initial_state());
  for (int k = 0; k <= 100; ++k) CHECK((same[k] - anchor[k]).norm() == 0.0);
  const Vector x_new = vec(0.01, -0.02);
  const Trajectory pred = predict_trajectory(fwd, anchor, x_new);
  const Trajectory truth = simulate(cf, x_new, 100);
  for (int k = 0; k <= 100; ++k) CHECK((pred[k] - truth[k]).norm() < 1e-12);

  const ExactInverseOracle inv(cf);
  CHECK_THROWS_AS(predict_trajectory(inv, anchor, x_new), InputError);
  CHECK_THROWS_AS(predict_trajectory(fwd, anchor, Vector::Zero(3)), InputError);
}

TEST_CASE("predict_trajectory with a trained forward model") {
  const auto sys = catalog::damped_oscillator();
  GenerationConfig gc;
  gc.num_anchors = 10;
  gc.num_neighbors = 5;
  gc.kind = SensitivityKind::forward;
  gc.seed = 8;
  const auto ds = generate_dataset(sys, *sys.initial_set, gc);
  TrainingConfig tc;
  tc.epochs = 4;
  tc.hidden_width = 128;
  tc.seed = 8;
  const MLPModel model = train(ds, tc).first;
  const MagnitudeModel magnitude = MagnitudeModel::fit(ds);

  std::mt19937_64 rng(3);
  const Vector x0 = sys.initial_set->sample(rng);
  const Vector x_new = x0 + 0.01 * random_unit_vector(2, rng);
  const Trajectory anchor = simulate(sys, x0, sys.max_steps);
  const Trajectory truth = simulate(sys, x_new, sys.max_steps);
  for (const auto& m : {MagnitudeModel{}, magnitude}) {
    const Trajectory pred = predict_trajectory(model, anchor, x_new, m);
    double err = 0.0;
    for (int k = 0; k <= sys.max_steps; ++k) err += (pred[k] - truth[k]).norm();
    CHECK(err / (sys.max_steps + 1) <= 10.0 * 0.01);
  }
}

TEST_CASE("magnitude model fit") {
  SensitivityDataset ds;
  for (int i = 0; i < 5; ++i) {
    SampleTuple t;
    t.kind = SensitivityKind::forward;
    t.t = 0.5 * i;
    t.mag_v = 0.01;
    t.mag_vminus = 0.01 * (1.0 + 0.2 * t.t);
    ds.tuples.push_back(t);
  }
  const auto m = MagnitudeModel::fit(ds);
  CHECK(m.intercept == doctest::Approx(1.0));
  CHECK(m.slope == doctest::Approx(0.2));
  ds.tuples.resize(1);
  CHECK_THROWS_AS(MagnitudeModel::fit(ds), InputError);
}
