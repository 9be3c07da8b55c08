#include "nexg/falsification.hpp"

#include "nexg/errors.hpp"
#include "nexg/json_util.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace nexg {

void validate_spec(const SafetySpec& spec) {
  validate_box(spec.unsafe, "unsafe set");
  if (!(spec.t_lo >= 0.0) || !(spec.t_hi >= spec.t_lo) || !std::isfinite(spec.t_hi)) {
    throw InputError("interval must satisfy 0 <= t_lo <= t_hi");
  }
}

SafetySpec spec_from_json(const nlohmann::json& j) {
  using namespace json_util;
  SafetySpec spec;
  spec.unsafe = get_box(field(j, "unsafe_box", ""), "unsafe_box");
  const Vector interval = get_vector(field(j, "interval", ""), "interval");
  if (interval.size() != 2) throw ParseError("interval", "expected [t_lo, t_hi]");
  spec.t_lo = interval[0];
  spec.t_hi = interval[1];
  try {
    validate_spec(spec);
  } catch (const InputError& e) {
    throw ParseError("interval", e.what());
  }
  return spec;
}

SafetySpec load_spec(const std::string& path) { return spec_from_json(json_util::read_file(path)); }

double signed_distance(const Vector& x, const Box& box) {
  if (box.contains(x)) return -box.depth(x);
  return box.distance(x);
}

std::pair<int, int> interval_indices(const SafetySpec& spec, double h) {
  // Snap bounds that sit on the grid up to rounding error.
  constexpr double kSnap = 1e-9;
  const int lo = static_cast<int>(std::ceil(spec.t_lo / h - kSnap));
  const int hi = static_cast<int>(std::floor(spec.t_hi / h + kSnap));
  if (hi < lo) throw InputError("interval contains no grid time");
  return {lo, hi};
}

double robustness(const Trajectory& traj, const SafetySpec& spec) {
  if (traj.dim() != spec.unsafe.dim()) throw InputError("unsafe set dimension does not match the trajectory");
  const auto [lo, hi] = interval_indices(spec, traj.h());
  if (hi > traj.steps()) throw InputError("interval extends beyond the trajectory horizon");
  double rho = std::numeric_limits<double>::infinity();
  for (int k = lo; k <= hi; ++k) rho = std::min(rho, signed_distance(traj[k], spec.unsafe));
  return rho;
}

TargetChoice pick_target(const SafetySpec& spec, const Trajectory& anchor, std::uint64_t seed) {
  const auto [lo, hi] = interval_indices(spec, anchor.h());
  if (hi > anchor.steps()) throw InputError("interval extends beyond the anchor horizon");
  std::mt19937_64 rng(seed);
  TargetChoice choice;
  choice.z = spec.unsafe.sample(rng);
  int best = lo;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = lo; k <= hi; ++k) {
    const double d = (anchor[k] - choice.z).norm();
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  choice.t = best * anchor.h();
  return choice;
}

namespace {

constexpr int kMaxAnchorDraws = 1000;

}  // namespace

FalsificationResult falsify_rd(const ClosedLoopSystem& system, const DirectionalApproximator& approx,
                               const Box& theta, const SafetySpec& spec, const RDParams& params,
                               std::uint64_t seed) {
  validate_params(params);
  validate_spec(spec);
  validate_box(theta, "theta");
  const auto [lo, hi] = interval_indices(spec, system.h);
  (void)lo;
  if (hi > system.max_steps) throw InputError("interval extends beyond the system horizon");
  std::mt19937_64 rng(seed);

  Trajectory anchor;
  double rho = -1.0;
  for (int draw = 0; draw < kMaxAnchorDraws && rho < 0.0; ++draw) {
    anchor = simulate(system, theta.sample(rng), hi);
    rho = robustness(anchor, spec);
  }
  if (rho < 0.0) throw InputError("every sampled initial anchor already falsifies the specification");

  FalsificationResult result;
  result.target = pick_target(spec, anchor, rng());
  const int index = step_index(result.target.t, system.h);
  result.trajectory = anchor;
  result.rho = rho;
  result.per_iteration_rho.push_back(rho);

  Vector x0 = anchor.initial_state();
  Vector x_t = anchor[index];
  int k = 0;
  while (rho > 0.0 && !spec.unsafe.contains_strictly(x_t) && k < params.bound) {
    const Vector w = result.target.z - x_t;
    if (!(w.norm() > 0.0)) break;
    try {
      x0 = perturb_initial_state(approx, x0, x_t, progress_vector(w, params), result.target.t, theta, params);
    } catch (const DegeneratePredictionError&) {
      break;
    }
    const Trajectory next = simulate(system, x0, hi);
    ++k;
    x_t = next[index];
    rho = robustness(next, spec);
    result.per_iteration_rho.push_back(rho);
    if (rho < result.rho) {
      result.rho = rho;
      result.trajectory = next;
    }
  }
  result.k = k;
  result.falsified = result.rho < 0.0;
  return result;
}

FalsificationResult falsify_baseline(const ClosedLoopSystem& system, const Box& theta, const SafetySpec& spec,
                                     int budget, double beta, std::uint64_t seed) {
  if (budget < 1) throw InputError("budget must be >= 1");
  if (!(beta >= 0.0)) throw InputError("beta must be non-negative");
  validate_spec(spec);
  validate_box(theta, "theta");
  const auto [lo, hi] = interval_indices(spec, system.h);
  (void)lo;
  if (hi > system.max_steps) throw InputError("interval extends beyond the system horizon");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vector sigma = 0.1 * theta.widths();

  FalsificationResult result;
  Vector current = theta.sample(rng);
  Trajectory traj = simulate(system, current, hi);
  double current_rho = robustness(traj, spec);
  result.k = 1;
  result.rho = current_rho;
  result.trajectory = traj;
  result.per_iteration_rho.push_back(current_rho);
  const double rho_scale = std::abs(current_rho) > 0.0 ? std::abs(current_rho) : 1.0;

  while (result.rho >= 0.0 && result.k < budget) {
    Vector proposal(current.size());
    for (Eigen::Index i = 0; i < current.size(); ++i) proposal[i] = current[i] + sigma[i] * gauss(rng);
    proposal = theta.project(proposal);
    Trajectory candidate = simulate(system, proposal, hi);
    ++result.k;
    const double rho = robustness(candidate, spec);
    result.per_iteration_rho.push_back(rho);
    if (rho < result.rho) {
      result.rho = rho;
      result.trajectory = candidate;
    }
    const double drho = rho - current_rho;
    if (drho < 0.0 || unit(rng) < std::exp(-beta * drho / rho_scale)) {
      current = proposal;
      current_rho = rho;
    }
  }
  result.falsified = result.rho < 0.0;
  return result;
}

}  // namespace nexg
