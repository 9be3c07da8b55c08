#include "nexg/approximator.hpp"

#include "nexg/errors.hpp"
#include "nexg/sensitivity.hpp"

namespace nexg {

std::string to_string(SensitivityKind k) { return k == SensitivityKind::inverse ? "inverse" : "forward"; }

SensitivityKind parse_kind(const std::string& name) {
  if (name == "inverse") return SensitivityKind::inverse;
  if (name == "forward") return SensitivityKind::forward;
  throw InputError("unknown sensitivity kind '" + name + "'");
}

Vector normalize_prediction(const Vector& raw) {
  const double n = raw.norm();
  if (!(n >= 1e-12) || !std::isfinite(n)) throw DegeneratePredictionError("approximator returned a zero vector");
  return raw / n;
}

namespace {

void check_unit(const Vector& v_hat) {
  if (std::abs(v_hat.norm() - 1.0) > 1e-6) throw InputError("perturbation direction must be unit-norm");
}

}  // namespace

ExactInverseOracle::ExactInverseOracle(ClosedLoopSystem system, double probe_radius)
    : system_(std::move(system)), probe_radius_(probe_radius) {
  if (!(probe_radius_ > 0.0)) throw InputError("probe radius must be positive");
}

Vector ExactInverseOracle::predict(const Vector& state, const Vector& v_hat, double t) const {
  check_unit(v_hat);
  return normalize_prediction(inverse_sensitivity_oracle(system_, state, probe_radius_ * v_hat, t));
}

std::optional<Vector> ExactInverseOracle::predict_vector(const Vector& state, const Vector& v, double t) const {
  return inverse_sensitivity_oracle(system_, state, v, t);
}

ApproximatorInfo ExactInverseOracle::info() const { return {system_.name, SensitivityKind::inverse, true}; }

ExactForwardOracle::ExactForwardOracle(ClosedLoopSystem system, double probe_radius)
    : system_(std::move(system)), probe_radius_(probe_radius) {
  if (!(probe_radius_ > 0.0)) throw InputError("probe radius must be positive");
}

Vector ExactForwardOracle::predict(const Vector& state, const Vector& v_hat, double t) const {
  check_unit(v_hat);
  return normalize_prediction(sensitivity_exact(system_, state, probe_radius_ * v_hat, t));
}

std::optional<Vector> ExactForwardOracle::predict_vector(const Vector& state, const Vector& v, double t) const {
  return sensitivity_exact(system_, state, v, t);
}

ApproximatorInfo ExactForwardOracle::info() const { return {system_.name, SensitivityKind::forward, true}; }

}  // namespace nexg
