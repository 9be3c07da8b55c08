#include "nexg/box.hpp"

#include "nexg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nexg {

Box::Box(Vector lo_, Vector hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {}

bool Box::contains(const Vector& x, double tol) const {
  for (int i = 0; i < dim(); ++i) {
    if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
  }
  return true;
}

bool Box::contains_strictly(const Vector& x) const {
  for (int i = 0; i < dim(); ++i) {
    if (!(x[i] > lo[i] && x[i] < hi[i])) return false;
  }
  return true;
}

bool Box::on_boundary(const Vector& x, double tol) const {
  if (!contains(x, tol)) return false;
  for (int i = 0; i < dim(); ++i) {
    if (std::abs(x[i] - lo[i]) <= tol || std::abs(x[i] - hi[i]) <= tol) return true;
  }
  return false;
}

Vector Box::project(const Vector& x) const { return x.cwiseMax(lo).cwiseMin(hi); }

Vector Box::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector x(dim());
  for (int i = 0; i < dim(); ++i) x[i] = lo[i] + unit(rng) * (hi[i] - lo[i]);
  return x;
}

double Box::distance(const Vector& x) const { return (x - project(x)).norm(); }

double Box::depth(const Vector& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim(); ++i) d = std::min({d, x[i] - lo[i], hi[i] - x[i]});
  return d;
}

std::vector<Vector> Box::corners() const {
  const int n = dim();
  std::vector<Vector> out;
  out.reserve(std::size_t{1} << n);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    Vector c(n);
    for (int i = 0; i < n; ++i) c[i] = (mask >> i) & 1u ? hi[i] : lo[i];
    out.push_back(std::move(c));
  }
  return out;
}

void validate_box(const Box& box, const std::string& what) {
  if (box.lo.size() != box.hi.size() || box.lo.size() == 0) {
    throw InputError(what + ": lo/hi dimension mismatch");
  }
  for (int i = 0; i < box.dim(); ++i) {
    if (!std::isfinite(box.lo[i]) || !std::isfinite(box.hi[i])) {
      throw InputError(what + ": non-finite bound");
    }
    if (box.lo[i] > box.hi[i]) throw InputError(what + ": empty box (lo > hi)");
  }
}

Vector parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      double v = std::stod(item, &used);
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
      values.push_back(v);
    } catch (const std::exception&) {
      throw ParseError("", "cannot parse '" + item + "' as a number");
    }
  }
  if (values.empty()) throw ParseError("", "empty vector");
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Vector random_unit_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(n);
  double norm = 0.0;
  do {
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    norm = v.norm();
  } while (norm < 1e-12);
  return v / norm;
}

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace nexg
