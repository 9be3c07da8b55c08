#pragma once

#include "nexg/approximator.hpp"
#include "nexg/dataset.hpp"
#include "nexg/dynamics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nexg {

enum class DirectionPolicy { straight_line, axis_aligned };

/// How an inner step turns a progress vector v into an initial-state increment.
///  - exact_vector: x0 += N(x_t, v, t), the approximator's full displacement.
///  - directional:  x0 += (s * ||v||) * N~(x_t, v / ||v||, t).
///  - automatic:    exact_vector when the approximator provides magnitudes
///                  (simulation oracles), directional otherwise.
enum class StepRule { automatic, exact_vector, directional };

DirectionPolicy parse_policy(const std::string& name);

struct RDParams {
  double s = 0.5;       // scaling factor, (0, 1]
  int p = 2;            // correction period
  double delta = 0.004; // termination threshold
  int bound = 30;       // maximum course corrections
  DirectionPolicy policy = DirectionPolicy::straight_line;
  StepRule step_rule = StepRule::automatic;
};

/// Throws InputError for s outside (0, 1], p < 1, delta <= 0 or bound < 0.
void validate_params(const RDParams& params);

struct RDIterate {
  Vector x0;
  Vector x_t;
  double d_a = 0.0;
};

enum class RDStatus { reached, bound_exhausted, degenerate_prediction };
std::string to_string(RDStatus s);

struct RDResult {
  int k = 0;  // course corrections == simulations issued after the input anchor
  Trajectory final_trajectory;
  double d_a = 0.0;
  double d_r = 0.0;
  double d_init = 0.0;
  std::vector<RDIterate> log;  // k + 1 entries
  RDStatus status = RDStatus::bound_exhausted;
  int best_index = 0;          // log entry with the smallest d_a
  int simulations = 0;
};

/// Euclidean projection onto theta (coordinate-wise clamp).
Vector project_to_box(const Vector& x, const Box& theta);

/// The +-e_i closest in angle to w. Ties go to the lowest index, + before -.
Vector axis_aligned_direction(const Vector& w);

/// Progress vector for one outer iteration: s * w, or s * ||w|| * axis(w).
Vector progress_vector(const Vector& w, const RDParams& params);

/// The p inner steps of one outer iteration: predicts the initial-state
/// increment, projects onto theta and advances x_t virtually by v each step.
/// Returns the new initial state. Throws DegeneratePredictionError.
Vector perturb_initial_state(const DirectionalApproximator& approx, Vector x0, Vector x_t, const Vector& v, double t,
                             const Box& theta, const RDParams& params);

/// Searches for an initial state in theta whose trajectory passes within
/// delta of z at time t, starting from `anchor`. t snaps to the grid.
RDResult reach_destination(const ClosedLoopSystem& system, const DirectionalApproximator& approx,
                           const Trajectory& anchor, const Vector& z, double t, const Box& theta,
                           const RDParams& params);

struct ExtremePoint {
  Vector x_t;
  Vector x0;
  int corrections = 0;
};

/// Pushes anchor(t) as far as possible along `direction` (unit) by repeated
/// RD steps with a fixed progress direction. Stops once the projected
/// initial state moves less than delta for p consecutive inner steps, or
/// after params.bound corrections. Returns the simulated state with the
/// largest component along `direction`. `step_length` (<= 0: theta's
/// diameter) is the nominal distance the progress vector is scaled from.
ExtremePoint reach_extreme(const ClosedLoopSystem& system, const DirectionalApproximator& approx,
                           const Trajectory& anchor, double t, const Vector& direction, const Box& theta,
                           const RDParams& params, double step_length = 0.0);

struct CoverageReport {
  Trajectory anchor;
  double t = 0.0;
  std::vector<Vector> template_directions;
  std::vector<double> support_values;     // max of d . x_t found per template
  std::vector<Vector> polygon_vertices;
  std::vector<Vector> sampled_targets;
  std::vector<bool> reached;
  std::vector<Vector> best_initial_points;
  std::vector<double> final_distances;
  double coverage_fraction = 0.0;
};

/// RD from `anchor` to every target; fills the target/reached/best-point
/// fields. Runs targets concurrently; results are ordered by target index.
CoverageReport coverage_for_targets(const ClosedLoopSystem& system, const DirectionalApproximator& approx,
                                    const Box& theta, const Trajectory& anchor, double t,
                                    const std::vector<Vector>& targets, const RDParams& params, int threads = 1);

/// Bounding polygon from 2n extremal searches along +-e_i around a random
/// anchor, then `num_targets` uniform targets inside it.
CoverageReport coverage(const ClosedLoopSystem& system, const DirectionalApproximator& approx, const Box& theta,
                        double t, int num_targets, const RDParams& params, std::uint64_t seed, int threads = 1);

/// Approximation quality and system regularity entering the convergence bound.
struct ConvergenceParams {
  double eps_rel = 0.0;
  double eps_abs = 0.0;
  double eta1 = 1.0;
  double eta2 = 1.0;
  double gamma = 1.0;  // 1 - eps_rel * eta2 / eta1
  double r_eps = 0.0;  // eps_abs * eta2 / gamma

  static ConvergenceParams from_errors(double eps_rel, double eps_abs, double eta1, double eta2);
  static ConvergenceParams from_rates(double gamma, double r_eps);
};

/// (1 - s p gamma)^k d_init + r_eps / s.
double convergence_bound(double d_init, double s, int p, const ConvergenceParams& cp, int k);

/// ceil(log((delta - r_eps/s) / d_init) / log(1 - s p gamma)), clamped at 0.
/// Throws NoGuaranteeError when delta <= r_eps / s.
int k_star(double d_init, double delta, double s, int p, const ConvergenceParams& cp);

/// Ratio ||Phi(x0, v, t)|| / ||v|| as a function of t, for predict_trajectory.
struct MagnitudeModel {
  double intercept = 1.0;
  double slope = 0.0;
  double operator()(double t) const { return intercept + slope * t; }
  /// Least-squares line through (t, mag_vminus / mag_v) of forward tuples.
  static MagnitudeModel fit(const SensitivityDataset& forward_data);
};

/// anchor(k) + ||v0|| * m(k h) * N~_Phi(anchor(0), v0 / ||v0||, k h) with
/// v0 = x0_new - anchor(0). No simulation is run.
Trajectory predict_trajectory(const DirectionalApproximator& forward_approx, const Trajectory& anchor,
                              const Vector& x0_new, const MagnitudeModel& magnitude = {},
                              double training_radius = 0.01);

}  // namespace nexg
