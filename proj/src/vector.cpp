#include "memedial/vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "memedial/error.hpp"

namespace memedial {

namespace {

void check_finite(const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw ValidationError("vector component " + std::to_string(i) + " is not finite");
    }
  }
}

void check_same_size(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw DimensionError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
}

}  // namespace

Vector::Vector(std::vector<double> components) : data_(std::move(components)) {
  check_finite(data_);
}

Vector::Vector(std::initializer_list<double> components) : data_(components) {
  check_finite(data_);
}

double dot(const Vector& a, const Vector& b) {
  check_same_size(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double l2_norm(const Vector& a) {
  double sum = 0.0;
  for (double x : a) sum += x * x;
  return std::sqrt(sum);
}

double cosine_similarity(const Vector& a, const Vector& b) {
  check_same_size(a, b);
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) throw ValidationError("cosine of a zero vector");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

Vector l2_normalize(const Vector& a) {
  const double n = l2_norm(a);
  if (n == 0.0) throw ValidationError("cannot normalize a zero vector");
  std::vector<double> out(a.begin(), a.end());
  for (double& x : out) x /= n;
  return Vector(std::move(out));
}

Vector scale(const Vector& a, double s) {
  std::vector<double> out(a.begin(), a.end());
  for (double& x : out) x *= s;
  return Vector(std::move(out));
}

Vector to_storage_precision(const Vector& a) {
  std::vector<double> out(a.begin(), a.end());
  for (double& x : out) x = static_cast<double>(static_cast<float>(x));
  return Vector(std::move(out));
}

Vector unit_storage_vector(const Vector& a) { return to_storage_precision(l2_normalize(a)); }

}  // namespace memedial
