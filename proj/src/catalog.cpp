#include "nexg/catalog.hpp"

#include "nexg/errors.hpp"

namespace nexg::catalog {

namespace {

Box box2(double lo0, double hi0, double lo1, double hi1) {
  return Box(Eigen::Vector2d(lo0, lo1), Eigen::Vector2d(hi0, hi1));
}

}  // namespace

ClosedLoopSystem constant_field() {
  ClosedLoopSystem s;
  s.name = "constant_field";
  s.dimension = 2;
  s.plant = BuiltinPlant{"constant", {1.0, 0.0}};
  s.initial_set = box2(-1.0, 1.0, -1.0, 1.0);
  s.h = 0.01;
  s.max_steps = 250;
  return s;
}

ClosedLoopSystem rotation() {
  ClosedLoopSystem s;
  s.name = "rotation";
  s.dimension = 2;
  s.plant = BuiltinPlant{"rotation", {1.0}};
  s.initial_set = box2(0.5, 1.0, -0.25, 0.25);
  s.h = 0.01;
  s.max_steps = 250;
  return s;
}

ClosedLoopSystem damped_oscillator() {
  ClosedLoopSystem s;
  s.name = "damped_oscillator";
  s.dimension = 2;
  LinearPlant p;
  p.A = Matrix{{0.0, 1.0}, {0.0, 0.0}};
  p.B = Matrix{{0.0}, {1.0}};
  s.plant = p;
  DenseLayer k;
  k.weights = Matrix{{-1.0, -0.4}};
  k.bias = Vector::Zero(1);
  k.activation = Activation::linear;
  s.controller = NeuralController({k});
  s.initial_set = box2(0.5, 1.0, -0.25, 0.25);
  s.h = 0.01;
  s.max_steps = 250;
  return s;
}

ClosedLoopSystem vanderpol() {
  ClosedLoopSystem s;
  s.name = "vanderpol";
  s.dimension = 2;
  s.plant = BuiltinPlant{"vanderpol", {0.5}};
  DenseLayer hidden;
  hidden.weights = Matrix{{0.5, 0.2}, {-0.3, 0.4}, {0.1, -0.6}, {0.4, 0.3}};
  hidden.bias = Vector{{0.0, 0.1, -0.1, 0.0}};
  hidden.activation = Activation::tanh;
  DenseLayer out;
  out.weights = Matrix{{-0.3, -0.2, 0.25, -0.15}};
  out.bias = Vector::Zero(1);
  out.activation = Activation::linear;
  s.controller = NeuralController({hidden, out});
  s.initial_set = box2(0.5, 1.0, -0.25, 0.25);
  s.h = 0.01;
  s.max_steps = 250;
  return s;
}

ClosedLoopSystem poly3d() {
  ClosedLoopSystem s;
  s.name = "poly3d";
  s.dimension = 3;
  PolynomialPlant p;
  // x1' = -0.5 x1 + x2
  // x2' = -x1 - 0.5 x2 + 0.5 x1 x3
  // x3' = -0.4 x3 + 0.3 x1^2
  p.rows = {
      {{-0.5, {1, 0, 0}, {}}, {1.0, {0, 1, 0}, {}}},
      {{-1.0, {1, 0, 0}, {}}, {-0.5, {0, 1, 0}, {}}, {0.5, {1, 0, 1}, {}}},
      {{-0.4, {0, 0, 1}, {}}, {0.3, {2, 0, 0}, {}}},
  };
  s.plant = p;
  s.initial_set = Box(Eigen::Vector3d(0.4, 0.4, 0.4), Eigen::Vector3d(0.8, 0.8, 0.8));
  s.h = 0.01;
  s.max_steps = 250;
  return s;
}

std::vector<std::string> names() {
  return {"constant_field", "rotation", "damped_oscillator", "vanderpol", "poly3d"};
}

ClosedLoopSystem by_name(const std::string& name) {
  if (name == "constant_field") return constant_field();
  if (name == "rotation") return rotation();
  if (name == "damped_oscillator") return damped_oscillator();
  if (name == "vanderpol") return vanderpol();
  if (name == "poly3d") return poly3d();
  throw InputError("unknown catalog system '" + name + "'");
}

}  // namespace nexg::catalog
