#pragma once

#include "nexg/approximator.hpp"
#include "nexg/dynamics.hpp"
#include "nexg/explorer.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace nexg {

/// "Never inside U during [t_lo, t_hi]".
struct SafetySpec {
  Box unsafe;
  double t_lo = 0.0;
  double t_hi = 0.0;
};

void validate_spec(const SafetySpec& spec);

/// {unsafe_box: {lo, hi}, interval: [t_lo, t_hi]}
SafetySpec load_spec(const std::string& path);
SafetySpec spec_from_json(const nlohmann::json& j);

/// Signed distance to a box: Euclidean distance outside, minus the depth inside.
double signed_distance(const Vector& x, const Box& box);

/// Grid-time indices of the interval for step h: ceil(t_lo/h) .. floor(t_hi/h).
std::pair<int, int> interval_indices(const SafetySpec& spec, double h);

/// min over grid times in the interval of signed_distance(traj(t), U).
double robustness(const Trajectory& traj, const SafetySpec& spec);

struct TargetChoice {
  Vector z;
  double t = 0.0;
};

/// z uniform in U; t the grid time in the interval where the anchor is
/// closest to z (earliest on ties).
TargetChoice pick_target(const SafetySpec& spec, const Trajectory& anchor, std::uint64_t seed);

struct FalsificationResult {
  bool falsified = false;
  int k = 0;  // simulations counted against the budget
  double rho = 0.0;
  Trajectory trajectory;
  std::vector<double> per_iteration_rho;
  TargetChoice target;  // RD only
};

/// RD-guided search: anchor uniform in theta (resampled while it already
/// falsifies), then RD toward pick_target's (z, t) while rho > 0, x_t is
/// outside U and k < params.bound. Returns the lowest-rho trajectory seen.
FalsificationResult falsify_rd(const ClosedLoopSystem& system, const DirectionalApproximator& approx,
                               const Box& theta, const SafetySpec& spec, const RDParams& params,
                               std::uint64_t seed);

/// Simulated-annealing baseline over initial states: Gaussian proposals with
/// sigma = 10% of theta's widths (clamped to theta), accepted when rho drops
/// and otherwise with probability exp(-beta * drho / rho_scale), where
/// rho_scale is |rho| of the first sample.
FalsificationResult falsify_baseline(const ClosedLoopSystem& system, const Box& theta, const SafetySpec& spec,
                                     int budget, double beta, std::uint64_t seed);

}  // namespace nexg
