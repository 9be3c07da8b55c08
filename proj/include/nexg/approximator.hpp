#pragma once

#include "nexg/dynamics.hpp"

#include <optional>
#include <string>

namespace nexg {

enum class SensitivityKind { inverse, forward };

std::string to_string(SensitivityKind k);
SensitivityKind parse_kind(const std::string& name);

struct ApproximatorInfo {
  std::string system_name;
  SensitivityKind kind = SensitivityKind::inverse;
  bool is_oracle = false;
};

/// Predicts the unit direction of the (inverse) sensitivity for a unit
/// perturbation direction `v_hat` applied at `state` and time `t`.
///
/// Implementations that know the exact magnitude as well (the simulation
/// oracles) also answer `predict_vector`, the full displacement for a finite
/// perturbation `v`. The explorer uses that path when available and falls back
/// to direction-times-scaled-magnitude otherwise.
class DirectionalApproximator {
 public:
  virtual ~DirectionalApproximator() = default;

  /// Unit-norm output. Throws DegeneratePredictionError when the raw output vanishes.
  virtual Vector predict(const Vector& state, const Vector& v_hat, double t) const = 0;

  /// True when predict_vector returns a value.
  virtual bool provides_vector() const { return false; }

  virtual std::optional<Vector> predict_vector(const Vector& /*state*/, const Vector& /*v*/,
                                               double /*t*/) const {
    return std::nullopt;
  }

  virtual ApproximatorInfo info() const = 0;
};

/// Normalizes `raw`; throws DegeneratePredictionError if its norm is below 1e-12.
Vector normalize_prediction(const Vector& raw);

/// Exact inverse sensitivity via backward integration. `predict` evaluates
/// the oracle at a small probe radius and normalizes.
class ExactInverseOracle : public DirectionalApproximator {
 public:
  explicit ExactInverseOracle(ClosedLoopSystem system, double probe_radius = 1e-4);

  Vector predict(const Vector& state, const Vector& v_hat, double t) const override;
  bool provides_vector() const override { return true; }
  std::optional<Vector> predict_vector(const Vector& state, const Vector& v, double t) const override;
  ApproximatorInfo info() const override;
  const ClosedLoopSystem& system() const { return system_; }

 private:
  ClosedLoopSystem system_;
  double probe_radius_;
};

/// Exact forward sensitivity via two forward simulations.
class ExactForwardOracle : public DirectionalApproximator {
 public:
  explicit ExactForwardOracle(ClosedLoopSystem system, double probe_radius = 1e-4);

  Vector predict(const Vector& state, const Vector& v_hat, double t) const override;
  bool provides_vector() const override { return true; }
  std::optional<Vector> predict_vector(const Vector& state, const Vector& v, double t) const override;
  ApproximatorInfo info() const override;

 private:
  ClosedLoopSystem system_;
  double probe_radius_;
};

}  // namespace nexg
