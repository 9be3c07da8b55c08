#include "nexg/explorer.hpp"

#include "nexg/errors.hpp"
#include "nexg/parallel.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <random>

namespace nexg {

DirectionPolicy parse_policy(const std::string& name) {
  if (name == "straight" || name == "straight_line") return DirectionPolicy::straight_line;
  if (name == "axis" || name == "axis_aligned") return DirectionPolicy::axis_aligned;
  throw InputError("unknown direction policy '" + name + "'");
}

std::string to_string(RDStatus s) {
  switch (s) {
    case RDStatus::reached: return "reached";
    case RDStatus::bound_exhausted: return "bound_exhausted";
    case RDStatus::degenerate_prediction: return "degenerate_prediction";
  }
  return "unknown";
}

void validate_params(const RDParams& params) {
  if (!(params.s > 0.0 && params.s <= 1.0)) throw InputError("scaling factor s must lie in (0, 1]");
  if (params.p < 1) throw InputError("correction period p must be >= 1");
  if (!(params.delta > 0.0)) throw InputError("threshold delta must be positive");
  if (params.bound < 0) throw InputError("course-correction bound must be >= 0");
}

Vector project_to_box(const Vector& x, const Box& theta) {
  if (x.size() != theta.dim()) throw InputError("projection: dimension mismatch");
  return theta.project(x);
}

Vector axis_aligned_direction(const Vector& w) {
  if (w.size() == 0 || !(w.norm() > 0.0)) throw InputError("axis-aligned direction of a zero vector");
  Eigen::Index best = 0;
  double best_dot = -std::numeric_limits<double>::infinity();
  double best_sign = 1.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    for (double sign : {1.0, -1.0}) {
      if (sign * w[i] > best_dot) {
        best_dot = sign * w[i];
        best = i;
        best_sign = sign;
      }
    }
  }
  Vector e = Vector::Zero(w.size());
  e[best] = best_sign;
  return e;
}

Vector progress_vector(const Vector& w, const RDParams& params) {
  if (params.policy == DirectionPolicy::axis_aligned) return params.s * w.norm() * axis_aligned_direction(w);
  return params.s * w;
}

namespace {

bool use_exact_vector(const DirectionalApproximator& approx, StepRule rule) {
  switch (rule) {
    case StepRule::exact_vector:
      if (!approx.provides_vector()) throw InputError("approximator does not provide full displacement vectors");
      return true;
    case StepRule::directional: return false;
    case StepRule::automatic: return approx.provides_vector();
  }
  return false;
}

void check_anchor(const ClosedLoopSystem& system, const Trajectory& anchor, const Box& theta, int index) {
  if (anchor.dim() != system.dimension) throw InputError("anchor dimension does not match the system");
  if (std::abs(anchor.h() - system.h) > 1e-12) throw InputError("anchor step size does not match the system");
  if (theta.dim() != system.dimension) throw InputError("theta dimension does not match the system");
  if (index > anchor.steps()) throw InputError("target time lies beyond the anchor trajectory");
  const double tol = 1e-9 * std::max(1.0, theta.diameter());
  if (!theta.contains(anchor.initial_state(), tol)) throw InputError("anchor initial state lies outside theta");
}

}  // namespace

Vector perturb_initial_state(const DirectionalApproximator& approx, Vector x0, Vector x_t, const Vector& v, double t,
                             const Box& theta, const RDParams& params) {
  const bool exact = use_exact_vector(approx, params.step_rule);
  const double v_norm = v.norm();
  if (!(v_norm > 0.0)) throw DegeneratePredictionError("progress vector is zero");
  for (int j = 0; j < params.p; ++j) {
    Vector increment;
    if (exact) {
      increment = *approx.predict_vector(x_t, v, t);
    } else {
      increment = (params.s * v_norm) * approx.predict(x_t, v / v_norm, t);
    }
    x0 = theta.project(x0 + increment);
    x_t += v;
  }
  return x0;
}

RDResult reach_destination(const ClosedLoopSystem& system, const DirectionalApproximator& approx,
                           const Trajectory& anchor, const Vector& z, double t, const Box& theta,
                           const RDParams& params) {
  validate_params(params);
  const int index = step_index(t, system.h);
  check_anchor(system, anchor, theta, index);
  if (z.size() != system.dimension || !z.allFinite()) throw InputError("destination must be a finite state");
  const double t_grid = index * system.h;
  const int horizon = anchor.steps();

  RDResult result;
  Vector x0 = anchor.initial_state();
  Vector x_t = anchor[index];
  Vector w = z - x_t;
  double d_a = w.norm();
  result.d_init = d_a;
  result.final_trajectory = anchor;
  result.log.push_back({x0, x_t, d_a});

  int k = 0;
  while (d_a > params.delta && k < params.bound) {
    const Vector v = progress_vector(w, params);
    try {
      x0 = perturb_initial_state(approx, x0, x_t, v, t_grid, theta, params);
    } catch (const DegeneratePredictionError&) {
      result.status = RDStatus::degenerate_prediction;
      break;
    }
    result.final_trajectory = simulate(system, x0, horizon);
    ++result.simulations;
    x_t = result.final_trajectory[index];
    w = z - x_t;
    d_a = w.norm();
    ++k;
    result.log.push_back({x0, x_t, d_a});
    if (d_a < result.log[static_cast<std::size_t>(result.best_index)].d_a) result.best_index = k;
  }
  result.k = k;
  result.d_a = d_a;
  result.d_r = result.d_init > 0.0 ? d_a / result.d_init : 0.0;
  if (result.status != RDStatus::degenerate_prediction) {
    result.status = d_a <= params.delta ? RDStatus::reached : RDStatus::bound_exhausted;
  }
  return result;
}

ExtremePoint reach_extreme(const ClosedLoopSystem& system, const DirectionalApproximator& approx,
                           const Trajectory& anchor, double t, const Vector& direction, const Box& theta,
                           const RDParams& params, double step_length) {
  validate_params(params);
  const int index = step_index(t, system.h);
  check_anchor(system, anchor, theta, index);
  if (direction.size() != system.dimension || !(direction.norm() > 0.0)) {
    throw InputError("extreme direction must be a non-zero state-space vector");
  }
  const Vector d = direction.normalized();
  const double t_grid = index * system.h;
  if (step_length <= 0.0) step_length = theta.diameter() > 0.0 ? theta.diameter() : 1.0;

  ExtremePoint best{anchor[index], anchor.initial_state(), 0};
  double best_score = d.dot(best.x_t);

  Vector x0 = anchor.initial_state();
  Vector x_t = anchor[index];
  const Vector v = progress_vector(step_length * d, params);
  const bool exact = use_exact_vector(approx, params.step_rule);
  int still = 0;
  int corrections = 0;
  while (corrections < params.bound) {
    Vector virtual_x_t = x_t;
    for (int j = 0; j < params.p; ++j) {
      Vector increment;
      try {
        increment = exact ? *approx.predict_vector(virtual_x_t, v, t_grid)
                          : Vector((params.s * v.norm()) * approx.predict(virtual_x_t, v.normalized(), t_grid));
      } catch (const DegeneratePredictionError&) {
        best.corrections = corrections;
        return best;
      }
      const Vector next = theta.project(x0 + increment);
      still = (next - x0).norm() < params.delta ? still + 1 : 0;
      x0 = next;
      virtual_x_t += v;
    }
    if (still >= params.p) break;
    const Trajectory traj = simulate(system, x0, index);
    ++corrections;
    x_t = traj[index];
    const double score = d.dot(x_t);
    if (score > best_score) {
      best_score = score;
      best.x_t = x_t;
      best.x0 = x0;
    }
  }
  best.corrections = corrections;
  return best;
}

CoverageReport coverage_for_targets(const ClosedLoopSystem& system, const DirectionalApproximator& approx,
                                    const Box& theta, const Trajectory& anchor, double t,
                                    const std::vector<Vector>& targets, const RDParams& params, int threads) {
  CoverageReport report;
  report.anchor = anchor;
  report.t = t;
  report.sampled_targets = targets;
  const std::size_t m = targets.size();
  std::vector<char> reached(m, 0);
  report.best_initial_points.assign(m, Vector());
  report.final_distances.assign(m, 0.0);
  parallel_for(
      m,
      [&](std::size_t i) {
        const RDResult r = reach_destination(system, approx, anchor, targets[i], t, theta, params);
        const auto& best = r.log[static_cast<std::size_t>(r.best_index)];
        reached[i] = best.d_a <= params.delta ? 1 : 0;
        report.best_initial_points[i] = best.x0;
        report.final_distances[i] = best.d_a;
      },
      threads);
  report.reached.assign(reached.begin(), reached.end());
  std::size_t hits = 0;
  for (char c : reached) hits += c ? 1 : 0;
  report.coverage_fraction = m == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(m);
  return report;
}

CoverageReport coverage(const ClosedLoopSystem& system, const DirectionalApproximator& approx, const Box& theta,
                        double t, int num_targets, const RDParams& params, std::uint64_t seed, int threads) {
  if (num_targets < 1) throw InputError("coverage needs at least one target");
  validate_box(theta, "theta");
  const int n = system.dimension;
  const int index = step_index(t, system.h);
  std::mt19937_64 rng(seed);
  const Trajectory anchor = simulate(system, theta.sample(rng), index);

  std::vector<Vector> templates;
  for (int i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      Vector e = Vector::Zero(n);
      e[i] = sign;
      templates.push_back(e);
    }
  }
  std::vector<double> support(templates.size(), 0.0);
  parallel_for(
      templates.size(),
      [&](std::size_t j) {
        const ExtremePoint ext = reach_extreme(system, approx, anchor, t, templates[j], theta, params);
        support[j] = templates[j].dot(ext.x_t);
      },
      threads);

  Box polygon{Vector(n), Vector(n)};
  for (int i = 0; i < n; ++i) {
    polygon.hi[i] = support[static_cast<std::size_t>(2 * i)];
    polygon.lo[i] = -support[static_cast<std::size_t>(2 * i + 1)];
  }
  std::vector<Vector> targets;
  for (int i = 0; i < num_targets; ++i) targets.push_back(polygon.sample(rng));

  CoverageReport report = coverage_for_targets(system, approx, theta, anchor, t, targets, params, threads);
  report.template_directions = templates;
  report.support_values = support;
  report.polygon_vertices = polygon.corners();
  return report;
}

ConvergenceParams ConvergenceParams::from_errors(double eps_rel, double eps_abs, double eta1, double eta2) {
  if (eps_rel < 0.0 || eps_abs < 0.0) throw InputError("approximation errors must be non-negative");
  if (!(eta1 > 0.0) || !(eta2 > 0.0)) throw InputError("discrepancy witnesses must be positive");
  ConvergenceParams cp;
  cp.eps_rel = eps_rel;
  cp.eps_abs = eps_abs;
  cp.eta1 = eta1;
  cp.eta2 = eta2;
  cp.gamma = 1.0 - eps_rel * eta2 / eta1;
  if (!(cp.gamma > 0.0)) throw InputError("relative error too large: gamma <= 0");
  cp.r_eps = eps_abs * eta2 / cp.gamma;
  return cp;
}

ConvergenceParams ConvergenceParams::from_rates(double gamma, double r_eps) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InputError("gamma must lie in (0, 1]");
  if (!(r_eps >= 0.0)) throw InputError("r_eps must be non-negative");
  ConvergenceParams cp;
  cp.gamma = gamma;
  cp.r_eps = r_eps;
  return cp;
}

namespace {

double contraction(double s, int p, const ConvergenceParams& cp) {
  const double rate = s * p * cp.gamma;
  if (!(rate > 0.0 && rate < 1.0)) throw InputError("s * p * gamma must lie in (0, 1)");
  return 1.0 - rate;
}

}  // namespace

double convergence_bound(double d_init, double s, int p, const ConvergenceParams& cp, int k) {
  if (k < 0) throw InputError("iteration count must be non-negative");
  return std::pow(contraction(s, p, cp), k) * d_init + cp.r_eps / s;
}

int k_star(double d_init, double delta, double s, int p, const ConvergenceParams& cp) {
  const double q = contraction(s, p, cp);
  const double margin = delta - cp.r_eps / s;
  if (!(margin > 0.0)) throw NoGuaranteeError("delta <= r_eps / s: convergence to delta is not guaranteed");
  if (d_init <= margin) return 0;
  return static_cast<int>(std::ceil(std::log(margin / d_init) / std::log(q)));
}

MagnitudeModel MagnitudeModel::fit(const SensitivityDataset& data) {
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t count = 0;
  for (const auto& tup : data.tuples) {
    if (tup.kind != SensitivityKind::forward || !(tup.mag_v > 0.0)) continue;
    const double y = tup.mag_vminus / tup.mag_v;
    st += tup.t;
    sy += y;
    stt += tup.t * tup.t;
    sty += tup.t * y;
    ++count;
  }
  if (count < 2) throw InputError("magnitude fit needs at least two forward tuples");
  const double nn = static_cast<double>(count);
  const double denom = nn * stt - st * st;
  MagnitudeModel m;
  if (std::abs(denom) < 1e-15) {
    m.intercept = sy / nn;
    m.slope = 0.0;
  } else {
    m.slope = (nn * sty - st * sy) / denom;
    m.intercept = (sy - m.slope * st) / nn;
  }
  return m;
}

Trajectory predict_trajectory(const DirectionalApproximator& forward_approx, const Trajectory& anchor,
                              const Vector& x0_new, const MagnitudeModel& magnitude, double training_radius) {
  if (forward_approx.info().kind != SensitivityKind::forward) {
    throw InputError("trajectory prediction needs a forward-sensitivity approximator");
  }
  if (x0_new.size() != anchor.dim()) throw InputError("x0_new dimension does not match the anchor");
  const Vector v0 = x0_new - anchor.initial_state();
  const double r = v0.norm();
  if (r == 0.0) return anchor;
  if (training_radius > 0.0 && r > 5.0 * training_radius) {
    std::cerr << "warning: prediction radius " << r << " exceeds 5x the training radius\n";
  }
  const Vector v_hat = v0 / r;
  std::vector<Vector> samples;
  samples.reserve(anchor.samples().size());
  for (int k = 0; k <= anchor.steps(); ++k) {
    const double t = anchor.time(k);
    samples.push_back(anchor[k] + r * magnitude(t) * forward_approx.predict(anchor.initial_state(), v_hat, t));
  }
  return Trajectory(anchor.h(), std::move(samples));
}

}  // namespace nexg
