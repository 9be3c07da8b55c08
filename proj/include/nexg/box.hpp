#pragma once

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

namespace nexg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Closed axis-aligned box [lo, hi] in R^n.
struct Box {
  Vector lo;
  Vector hi;

  Box() = default;
  Box(Vector lo_, Vector hi_);

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vector& x, double tol = 0.0) const;
  /// Strict interior membership.
  bool contains_strictly(const Vector& x) const;
  bool on_boundary(const Vector& x, double tol) const;
  Vector center() const { return 0.5 * (lo + hi); }
  Vector widths() const { return hi - lo; }
  double diameter() const { return (hi - lo).norm(); }
  /// Element-wise clamp, i.e. the Euclidean projection onto the box.
  Vector project(const Vector& x) const;
  Vector sample(std::mt19937_64& rng) const;
  /// Euclidean distance from x to the box (0 inside).
  double distance(const Vector& x) const;
  /// Distance from an interior point to the nearest face.
  double depth(const Vector& x) const;
  /// The 2^n corners, ordered by the binary expansion of their index.
  std::vector<Vector> corners() const;
};

/// Throws InputError unless lo <= hi component-wise and all entries are finite.
void validate_box(const Box& box, const std::string& what);

/// Parses "a,b,c" into a vector.
Vector parse_vector(const std::string& text);

/// Uniform unit vector in R^n.
Vector random_unit_vector(int n, std::mt19937_64& rng);

bool all_finite(const Vector& v);

}  // namespace nexg
