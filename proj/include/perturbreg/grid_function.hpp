#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "perturbreg/errors.hpp"

namespace perturbreg {

template <std::floating_point T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <std::floating_point T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

template <std::floating_point T>
T sup_norm(const Vector<T>& v) {
  return v.size() == 0 ? T(0) : v.template lpNorm<Eigen::Infinity>();
}

/// Real function sampled on the uniform grid t_i = a + i*h, h = (b-a)/(n-1).
///
/// The last node is stored as exactly b, so a grid written out and read back
/// reproduces the same nodes bit for bit.
template <std::floating_point T>
class BasicGridFunction {
 public:
  BasicGridFunction(T a, T b, std::vector<T> values) : a_(a), b_(b), values_(std::move(values)) {
    detail::require(values_.size() >= 2, Errc::invalid_argument, "grid function needs at least two samples");
    detail::require(std::isfinite(a_) && std::isfinite(b_) && b_ > a_, Errc::invalid_argument,
                    "grid interval must satisfy a < b");
    detail::require(std::all_of(values_.begin(), values_.end(), [](T v) { return std::isfinite(v); }),
                    Errc::invalid_argument, "grid function values must be finite");
  }

  template <class F>
  static BasicGridFunction sample(T a, T b, std::size_t n, F&& f) {
    detail::require(n >= 2, Errc::invalid_argument, "grid function needs at least two samples");
    std::vector<T> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = static_cast<T>(f(node(a, b, n, i)));
    return BasicGridFunction(a, b, std::move(values));
  }

  static T node(T a, T b, std::size_t n, std::size_t i) {
    if (i + 1 == n) return b;
    return a + static_cast<T>(i) * ((b - a) / static_cast<T>(n - 1));
  }

  T a() const noexcept { return a_; }
  T b() const noexcept { return b_; }
  std::size_t size() const noexcept { return values_.size(); }
  T h() const noexcept { return (b_ - a_) / static_cast<T>(values_.size() - 1); }
  T t(std::size_t i) const { return node(a_, b_, values_.size(), i); }

  std::span<const T> values() const noexcept { return values_; }
  const std::vector<T>& data() const noexcept { return values_; }
  T operator[](std::size_t i) const { return values_[i]; }

  T sup_norm() const {
    T m = 0;
    for (T v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  Vector<T> to_vector() const {
    return Eigen::Map<const Vector<T>>(values_.data(), static_cast<Eigen::Index>(values_.size()));
  }

  /// Same grid, new samples.
  BasicGridFunction with_values(std::vector<T> values) const {
    detail::require(values.size() == values_.size(), Errc::dimension_mismatch, "sample count differs from grid");
    return BasicGridFunction(a_, b_, std::move(values));
  }

  BasicGridFunction with_values(const Vector<T>& values) const {
    return with_values(std::vector<T>(values.data(), values.data() + values.size()));
  }

  bool same_grid(const BasicGridFunction& other) const noexcept {
    return a_ == other.a_ && b_ == other.b_ && size() == other.size();
  }

 private:
  T a_;
  T b_;
  std::vector<T> values_;
};

using GridFunction = BasicGridFunction<double>;

/// Composite trapezoid weights h*[1/2, 1, ..., 1, 1/2].
template <std::floating_point T>
Vector<T> trapezoid_weights(std::size_t n, T h) {
  Vector<T> w = Vector<T>::Constant(static_cast<Eigen::Index>(n), h);
  w(0) = h / 2;
  w(static_cast<Eigen::Index>(n) - 1) = h / 2;
  return w;
}

/// h-weighted trapezoidal inner product of two functions on the same grid.
template <std::floating_point T>
T trapezoid_inner(const BasicGridFunction<T>& u, const BasicGridFunction<T>& v) {
  detail::require(u.same_grid(v), Errc::dimension_mismatch, "inner product of functions on different grids");
  return trapezoid_weights<T>(u.size(), u.h()).cwiseProduct(u.to_vector()).dot(v.to_vector());
}

}  // namespace perturbreg
