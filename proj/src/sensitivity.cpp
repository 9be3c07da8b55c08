#include "nexg/sensitivity.hpp"

#include "nexg/errors.hpp"
#include "nexg/parallel.hpp"

#include <fstream>
#include <iomanip>
#include <random>

namespace nexg {

Vector sensitivity_exact(const ClosedLoopSystem& system, const Vector& x0, const Vector& v, double t) {
  if (v.size() != x0.size()) throw InputError("perturbation and state differ in length");
  const int k = step_index(t, system.h);
  const Trajectory base = simulate(system, x0, k);
  const Trajectory moved = simulate(system, x0 + v, k);
  return moved.final_state() - base.final_state();
}

Vector inverse_sensitivity_oracle(const ClosedLoopSystem& system, const Vector& x_t, const Vector& v,
                                  double t) {
  if (v.size() != x_t.size()) throw InputError("perturbation and state differ in length");
  const int k = step_index(t, system.h);
  const Trajectory base = simulate_backward(system, x_t, k);
  const Trajectory moved = simulate_backward(system, x_t + v, k);
  return moved.final_state() - base.final_state();
}

PairSensitivity inverse_sensitivity_from_pair(const Trajectory& traj_a, const Trajectory& traj_b, double t) {
  if (std::abs(traj_a.h() - traj_b.h()) > 1e-15 * std::max(1.0, traj_a.h())) {
    throw InputError("trajectories use different step sizes");
  }
  if (traj_a.dim() != traj_b.dim()) throw InputError("trajectories differ in dimension");
  const int k = step_index(t, traj_a.h());
  if (k > traj_a.steps() || k > traj_b.steps()) throw InputError("trajectory too short for requested time");
  return {traj_a[k], traj_b[k] - traj_a[k], traj_b[0] - traj_a[0]};
}

std::vector<double> default_error_radii() { return {0.001, 0.0025, 0.005, 0.01, 0.025, 0.05}; }

ErrorCurve abs_error_curve(const DirectionalApproximator& approx, const ClosedLoopSystem& system,
                           const Box& theta, const std::vector<double>& radii, int samples_per_radius,
                           std::uint64_t seed, int threads) {
  if (samples_per_radius <= 0) throw InputError("abs_error_curve needs at least one sample per radius");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw InputError("radii must be positive");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw InputError("radii must be strictly increasing");
  }
  if (theta.dim() != system.dimension) throw InputError("theta dimension mismatch");

  ErrorCurve curve;
  curve.radii = radii;
  curve.eps_abs.assign(radii.size(), 0.0);
  curve.samples_per_radius = samples_per_radius;

  parallel_for(
      radii.size(),
      [&](std::size_t ri) {
        std::seed_seq seq{seed, static_cast<std::uint64_t>(ri)};
        std::mt19937_64 rng(seq);
        std::uniform_int_distribution<int> pick_step(1, system.max_steps);
        const double r = radii[ri];
        double total = 0.0;
        for (int s = 0; s < samples_per_radius; ++s) {
          const int k = pick_step(rng);
          const Trajectory traj = simulate(system, theta.sample(rng), k);
          const Vector& x_t = traj.final_state();
          const Vector v_hat = random_unit_vector(system.dimension, rng);
          const double t = k * system.h;
          const Vector exact = inverse_sensitivity_oracle(system, x_t, r * v_hat, t);
          const Vector estimate = approx.predict(x_t, v_hat, t) * exact.norm();
          total += (estimate - exact).norm();
        }
        curve.eps_abs[ri] = total / samples_per_radius;
      },
      threads);
  return curve;
}

void write_error_curve_csv(const ErrorCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << std::setprecision(17) << "radius,eps_abs,samples\n";
  for (std::size_t i = 0; i < curve.radii.size(); ++i) {
    out << curve.radii[i] << ',' << curve.eps_abs[i] << ',' << curve.samples_per_radius << '\n';
  }
}

}  // namespace nexg
