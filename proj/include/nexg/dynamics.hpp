#pragma once

#include "nexg/box.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace nexg {

enum class Activation { relu, tanh, sigmoid, linear };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);
double activate(Activation a, double x);

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::linear;
};

/// Feedforward state-feedback controller u = g(x).
class NeuralController {
 public:
  NeuralController() = default;
  /// Validates that layer dimensions chain and all weights are finite.
  explicit NeuralController(std::vector<DenseLayer> layers);

  int input_dim() const;
  int output_dim() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }

  Vector eval(const Vector& x) const;

 private:
  std::vector<DenseLayer> layers_;
};

// Plant vector fields f(x, u).

/// Named analytic field. Supported names: "constant" (params = velocity),
/// "rotation" (params = {omega}), "vanderpol" (params = {mu}; control enters
/// the second equation additively).
struct BuiltinPlant {
  std::string name;
  std::vector<double> params;
};

/// xdot = A x + B u
struct LinearPlant {
  Matrix A;
  Matrix B;  // n x m, m may be 0
};

/// One monomial coeff * prod x_i^a_i * prod u_j^b_j.
struct PolynomialTerm {
  double coeff = 0.0;
  std::vector<int> x_powers;
  std::vector<int> u_powers;
};

/// Row i holds the terms of the i-th derivative.
struct PolynomialPlant {
  int control_dim = 0;
  std::vector<std::vector<PolynomialTerm>> rows;
};

/// Programmatic plant. Not serializable.
struct CustomPlant {
  int control_dim = 0;
  std::function<Vector(const Vector& x, const Vector& u)> field;
};

using Plant = std::variant<BuiltinPlant, LinearPlant, PolynomialPlant, CustomPlant>;

/// Plant f(x, u) closed with an optional neural controller u = g(x).
struct ClosedLoopSystem {
  std::string name;
  int dimension = 0;
  Plant plant;
  std::optional<NeuralController> controller;
  std::optional<Box> domain;       // advisory only
  std::optional<Box> initial_set;  // default theta for tools
  double h = 0.01;
  int max_steps = 1;

  int control_dim() const;
  /// Closed-loop right-hand side f(x, g(x)).
  Vector rhs(const Vector& x) const;
};

/// Checks the structural invariants of a system; throws InputError.
void validate_system(const ClosedLoopSystem& system);

/// Fixed-step sampled solution; samples[i] ~ xi(x0, i*h).
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(double h, std::vector<Vector> samples);

  double h() const { return h_; }
  int steps() const { return static_cast<int>(samples_.size()) - 1; }
  int dim() const { return samples_.empty() ? 0 : static_cast<int>(samples_.front().size()); }
  const Vector& initial_state() const { return samples_.front(); }
  const Vector& operator[](int k) const { return samples_.at(static_cast<std::size_t>(k)); }
  const Vector& final_state() const { return samples_.back(); }
  double time(int k) const { return k * h_; }
  const std::vector<Vector>& samples() const { return samples_; }
  /// First k+1 samples.
  Trajectory prefix(int k) const;

 private:
  double h_ = 0.0;
  std::vector<Vector> samples_;
};

/// Snaps t to the nearest grid index k with t ~ k*h. Throws on negative t.
int step_index(double t, double h);

/// Classical RK4 with the system step; throws DivergenceError when any
/// coordinate leaves [-1e6, 1e6] or becomes non-finite.
Trajectory simulate(const ClosedLoopSystem& system, const Vector& x0, int steps);

/// Integrates the negated field: samples[i] ~ xi^{-1}(x1, i*h).
Trajectory simulate_backward(const ClosedLoopSystem& system, const Vector& x1, int steps);

constexpr double kBlowUpBound = 1e6;

/// CSV with header "step,t,x1,...,xn".
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace nexg
