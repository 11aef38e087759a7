#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace memedial {

// Dense real vector. Construction rejects NaN and infinities, so every
// Vector in the system has finite components.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::vector<double> components);
  Vector(std::initializer_list<double> components);

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  double operator[](std::size_t i) const { return data_[i]; }
  std::span<const double> components() const noexcept { return data_; }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

double dot(const Vector& a, const Vector& b);
double l2_norm(const Vector& a);

// a.b / (|a||b|), accumulated left to right and clamped to [-1, 1].
// Throws DimensionError on size mismatch, ValidationError on a zero vector.
double cosine_similarity(const Vector& a, const Vector& b);

Vector l2_normalize(const Vector& a);

Vector scale(const Vector& a, double s);

// Rounds every component to the nearest float. Embeddings are kept at this
// precision so that the 9-significant-digit persisted form reloads exactly.
Vector to_storage_precision(const Vector& a);

// Unit vector at storage precision: normalize, then round.
Vector unit_storage_vector(const Vector& a);

}  // namespace memedial
