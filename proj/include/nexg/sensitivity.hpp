#pragma once

#include "nexg/approximator.hpp"
#include "nexg/dynamics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nexg {

/// Phi(x0, v, t) = xi(x0 + v, t) - xi(x0, t).
Vector sensitivity_exact(const ClosedLoopSystem& system, const Vector& x0, const Vector& v, double t);

/// Phi^{-1}(x_t, v, t) = xi^{-1}(x_t + v, t) - xi^{-1}(x_t, t), by backward integration.
Vector inverse_sensitivity_oracle(const ClosedLoopSystem& system, const Vector& x_t, const Vector& v,
                                  double t);

/// Inverse-sensitivity sample read off two forward trajectories:
/// Phi^{-1}(x_t, v, t) = v_minus holds exactly.
struct PairSensitivity {
  Vector x_t;      // traj_a(t)
  Vector v;        // traj_b(t) - traj_a(t)
  Vector v_minus;  // traj_b(0) - traj_a(0)
};

PairSensitivity inverse_sensitivity_from_pair(const Trajectory& traj_a, const Trajectory& traj_b, double t);

/// Empirical additive error eps_abs(r) of a directional approximator.
struct ErrorCurve {
  std::vector<double> radii;
  std::vector<double> eps_abs;
  int samples_per_radius = 0;
};

std::vector<double> default_error_radii();

/// For every radius r, draws `samples_per_radius` (x_t, v_hat, t) from fresh
/// trajectories started uniformly in `theta` and averages
/// || N~(x_t, v_hat, t) * ||Phi^{-1}(x_t, r v_hat, t)|| - Phi^{-1}(x_t, r v_hat, t) ||.
/// Each radius uses its own seeded stream, so radii can run concurrently.
ErrorCurve abs_error_curve(const DirectionalApproximator& approx, const ClosedLoopSystem& system,
                           const Box& theta, const std::vector<double>& radii, int samples_per_radius,
                           std::uint64_t seed, int threads = 1);

/// CSV "radius,eps_abs,samples".
void write_error_curve_csv(const ErrorCurve& curve, const std::string& path);

}  // namespace nexg
