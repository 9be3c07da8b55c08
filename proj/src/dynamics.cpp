#include "nexg/dynamics.hpp"

#include "nexg/errors.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace nexg {

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "linear") return Activation::linear;
  throw InputError("unknown activation '" + name + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::linear: return "linear";
  }
  return "linear";
}

double activate(Activation a, double x) {
  switch (a) {
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::tanh: return std::tanh(x);
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Activation::linear: return x;
  }
  return x;
}

NeuralController::NeuralController(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InputError("controller has no layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    const std::string where = "controller layer " + std::to_string(i);
    if (l.weights.rows() != l.bias.size()) throw InputError(where + ": bias length != rows");
    if (!l.weights.allFinite() || !l.bias.allFinite()) throw InputError(where + ": non-finite weights");
    if (i > 0 && layers_[i - 1].weights.rows() != l.weights.cols()) {
      throw InputError(where + ": input width does not match previous layer output");
    }
  }
}

int NeuralController::input_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weights.cols());
}

int NeuralController::output_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weights.rows());
}

Vector NeuralController::eval(const Vector& x) const {
  if (x.size() != input_dim()) {
    throw InputError("controller input has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(input_dim()));
  }
  Vector a = x;
  for (const auto& l : layers_) {
    Vector z = l.weights * a + l.bias;
    if (l.activation != Activation::linear) {
      for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = activate(l.activation, z[i]);
    }
    a = std::move(z);
  }
  return a;
}

namespace {

int builtin_control_dim(const BuiltinPlant& p) { return p.name == "vanderpol" ? 1 : 0; }

Vector eval_builtin(const BuiltinPlant& p, const Vector& x, const Vector& u) {
  Vector dx(x.size());
  if (p.name == "constant") {
    for (Eigen::Index i = 0; i < x.size(); ++i) dx[i] = p.params.at(static_cast<std::size_t>(i));
  } else if (p.name == "rotation") {
    const double w = p.params.empty() ? 1.0 : p.params[0];
    dx[0] = w * x[1];
    dx[1] = -w * x[0];
  } else if (p.name == "vanderpol") {
    const double mu = p.params.empty() ? 1.0 : p.params[0];
    dx[0] = x[1];
    dx[1] = mu * (1.0 - x[0] * x[0]) * x[1] - x[0] + (u.size() > 0 ? u[0] : 0.0);
  } else {
    throw InputError("unknown builtin plant '" + p.name + "'");
  }
  return dx;
}

double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

Vector eval_polynomial(const PolynomialPlant& p, const Vector& x, const Vector& u) {
  Vector dx = Vector::Zero(static_cast<Eigen::Index>(p.rows.size()));
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    double acc = 0.0;
    for (const auto& term : p.rows[i]) {
      double m = term.coeff;
      for (std::size_t j = 0; j < term.x_powers.size(); ++j) {
        m *= ipow(x[static_cast<Eigen::Index>(j)], term.x_powers[j]);
      }
      for (std::size_t j = 0; j < term.u_powers.size(); ++j) {
        m *= ipow(u[static_cast<Eigen::Index>(j)], term.u_powers[j]);
      }
      acc += m;
    }
    dx[static_cast<Eigen::Index>(i)] = acc;
  }
  return dx;
}

}  // namespace

int ClosedLoopSystem::control_dim() const {
  return std::visit(
      [](const auto& p) -> int {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BuiltinPlant>) {
          return builtin_control_dim(p);
        } else if constexpr (std::is_same_v<T, LinearPlant>) {
          return static_cast<int>(p.B.cols());
        } else {
          return p.control_dim;
        }
      },
      plant);
}

Vector ClosedLoopSystem::rhs(const Vector& x) const {
  Vector u = controller ? controller->eval(x) : Vector::Zero(control_dim());
  return std::visit(
      [&](const auto& p) -> Vector {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BuiltinPlant>) {
          return eval_builtin(p, x, u);
        } else if constexpr (std::is_same_v<T, LinearPlant>) {
          Vector dx = p.A * x;
          if (p.B.cols() > 0) dx += p.B * u;
          return dx;
        } else if constexpr (std::is_same_v<T, PolynomialPlant>) {
          return eval_polynomial(p, x, u);
        } else {
          return p.field(x, u);
        }
      },
      plant);
}

void validate_system(const ClosedLoopSystem& s) {
  if (s.dimension <= 0) throw InputError("system dimension must be positive");
  if (!(s.h > 0.0) || !std::isfinite(s.h)) throw InputError("step h must be positive");
  if (s.max_steps < 1) throw InputError("max_steps T must be >= 1");
  const int n = s.dimension;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BuiltinPlant>) {
          if (p.name == "constant") {
            if (static_cast<int>(p.params.size()) != n) {
              throw InputError("constant plant needs one velocity per dimension");
            }
          } else if (p.name == "rotation" || p.name == "vanderpol") {
            if (n != 2) throw InputError(p.name + " plant is two-dimensional");
          } else {
            throw InputError("unknown builtin plant '" + p.name + "'");
          }
        } else if constexpr (std::is_same_v<T, LinearPlant>) {
          if (p.A.rows() != n || p.A.cols() != n) throw InputError("linear plant: A must be n x n");
          if (p.B.cols() > 0 && p.B.rows() != n) throw InputError("linear plant: B must have n rows");
        } else if constexpr (std::is_same_v<T, PolynomialPlant>) {
          if (static_cast<int>(p.rows.size()) != n) {
            throw InputError("polynomial plant: need one term list per dimension");
          }
          for (const auto& row : p.rows) {
            for (const auto& t : row) {
              if (static_cast<int>(t.x_powers.size()) > n ||
                  static_cast<int>(t.u_powers.size()) > p.control_dim) {
                throw InputError("polynomial plant: term has too many exponents");
              }
            }
          }
        } else {
          if (!p.field) throw InputError("custom plant has no field");
        }
      },
      s.plant);
  const int m = s.control_dim();
  if (s.controller) {
    if (s.controller->input_dim() != n) throw InputError("controller input width != dimension");
    if (s.controller->output_dim() != m) throw InputError("controller output width != control dimension");
  }
  if (s.domain) validate_box(*s.domain, "domain");
  if (s.initial_set) {
    validate_box(*s.initial_set, "initial_set");
    if (s.initial_set->dim() != n) throw InputError("initial_set dimension mismatch");
  }
}

Trajectory::Trajectory(double h, std::vector<Vector> samples) : h_(h), samples_(std::move(samples)) {
  if (samples_.empty()) throw InputError("trajectory needs at least one sample");
}

Trajectory Trajectory::prefix(int k) const {
  if (k < 0 || k > steps()) throw InputError("prefix length out of range");
  return Trajectory(h_, std::vector<Vector>(samples_.begin(), samples_.begin() + k + 1));
}

int step_index(double t, double h) {
  if (!(t >= -0.5 * h) || !std::isfinite(t)) throw InputError("time must be finite and non-negative");
  return static_cast<int>(std::llround(t / h));
}

namespace {

Trajectory integrate(const ClosedLoopSystem& system, const Vector& x0, int steps, double sign) {
  if (x0.size() != system.dimension) {
    throw InputError("initial state has length " + std::to_string(x0.size()) + ", system dimension is " +
                     std::to_string(system.dimension));
  }
  if (steps < 0 || steps > system.max_steps) {
    throw InputError("steps must lie in [0, " + std::to_string(system.max_steps) + "]");
  }
  if (!x0.allFinite()) throw InputError("initial state is not finite");
  if (system.domain && !system.domain->contains(x0)) {
    std::cerr << "warning: " << system.name << ": start state outside the domain\n";
  }
  const double h = sign * system.h;
  std::vector<Vector> samples;
  samples.reserve(static_cast<std::size_t>(steps) + 1);
  samples.push_back(x0);
  Vector x = x0;
  for (int i = 0; i < steps; ++i) {
    const Vector k1 = system.rhs(x);
    const Vector k2 = system.rhs(x + 0.5 * h * k1);
    const Vector k3 = system.rhs(x + 0.5 * h * k2);
    const Vector k4 = system.rhs(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kBlowUpBound) {
      throw DivergenceError(static_cast<std::size_t>(i),
                            system.name + ": integration diverged after sample " + std::to_string(i));
    }
    samples.push_back(x);
  }
  return Trajectory(system.h, std::move(samples));
}

}  // namespace

Trajectory simulate(const ClosedLoopSystem& system, const Vector& x0, int steps) {
  return integrate(system, x0, steps, 1.0);
}

Trajectory simulate_backward(const ClosedLoopSystem& system, const Vector& x1, int steps) {
  return integrate(system, x1, steps, -1.0);
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << std::setprecision(17) << "step,t";
  for (int i = 1; i <= traj.dim(); ++i) out << ",x" << i;
  out << '\n';
  for (int k = 0; k <= traj.steps(); ++k) {
    out << k << ',' << traj.time(k);
    for (int i = 0; i < traj.dim(); ++i) out << ',' << traj[k][i];
    out << '\n';
  }
}

}  // namespace nexg
