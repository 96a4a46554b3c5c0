#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "perturbreg/errors.hpp"
#include "perturbreg/grid_function.hpp"

namespace perturbreg {

/// Uniform grid on [a, b] carried by the closed-form integration operator.
template <std::floating_point T>
struct VolterraGrid {
  T a;
  T b;
  std::size_t n;

  T h() const noexcept { return (b - a) / static_cast<T>(n - 1); }
};

/// Trapezoidal matrix of x -> int_a^t x(s) ds. Row 0 is zero; row i holds
/// h*[1/2, 1, ..., 1, 1/2] over columns 0..i.
template <std::floating_point T>
Matrix<T> volterra_matrix(T a, T b, std::size_t n) {
  detail::require(n >= 2 && b > a, Errc::invalid_argument, "volterra grid needs n >= 2 and b > a");
  const T h = (b - a) / static_cast<T>(n - 1);
  const auto size = static_cast<Eigen::Index>(n);
  Matrix<T> m = Matrix<T>::Zero(size, size);
  for (Eigen::Index i = 1; i < size; ++i) {
    m(i, 0) = h / 2;
    for (Eigen::Index j = 1; j < i; ++j) m(i, j) = h;
    m(i, i) = h / 2;
  }
  return m;
}

/// Cumulative trapezoid integral of samples with spacing h; out[0] = 0.
template <std::floating_point T>
Vector<T> cumulative_trapezoid(const Vector<T>& x, T h) {
  Vector<T> out(x.size());
  if (x.size() == 0) return out;
  out(0) = 0;
  for (Eigen::Index i = 1; i < x.size(); ++i) out(i) = out(i - 1) + h / 2 * (x(i - 1) + x(i));
  return out;
}

/// A or its noisy approximation on the grid: either an explicit square matrix
/// or the tagged integration operator, which is applied in O(n).
template <std::floating_point T>
class DiscreteOperator {
 public:
  static DiscreteOperator dense(Matrix<T> m, std::optional<T> norm_hint = std::nullopt) {
    detail::require(m.rows() == m.cols() && m.rows() > 0, Errc::dimension_mismatch, "operator matrix must be square");
    detail::require(m.allFinite(), Errc::invalid_argument, "operator matrix must be finite");
    return DiscreteOperator(std::move(m), norm_hint);
  }

  static DiscreteOperator volterra(T a, T b, std::size_t n) {
    detail::require(n >= 2 && b > a, Errc::invalid_argument, "volterra grid needs n >= 2 and b > a");
    return DiscreteOperator(VolterraGrid<T>{a, b, n}, std::nullopt);
  }

  std::size_t size() const {
    if (const auto* g = std::get_if<VolterraGrid<T>>(&kind_)) return g->n;
    return static_cast<std::size_t>(std::get<Matrix<T>>(kind_).rows());
  }

  bool is_volterra() const noexcept { return std::holds_alternative<VolterraGrid<T>>(kind_); }
  const VolterraGrid<T>& volterra_grid() const { return std::get<VolterraGrid<T>>(kind_); }
  const std::optional<T>& norm_hint() const noexcept { return norm_hint_; }

  Matrix<T> to_dense() const {
    if (const auto* g = std::get_if<VolterraGrid<T>>(&kind_)) return volterra_matrix<T>(g->a, g->b, g->n);
    return std::get<Matrix<T>>(kind_);
  }

  Vector<T> apply(const Vector<T>& x) const {
    detail::require(static_cast<std::size_t>(x.size()) == size(), Errc::dimension_mismatch,
                    "operator applied to vector of wrong size");
    if (const auto* g = std::get_if<VolterraGrid<T>>(&kind_)) return cumulative_trapezoid<T>(x, g->h());
    return std::get<Matrix<T>>(kind_) * x;
  }

 private:
  DiscreteOperator(std::variant<Matrix<T>, VolterraGrid<T>> kind, std::optional<T> hint)
      : kind_(std::move(kind)), norm_hint_(hint) {}

  std::variant<Matrix<T>, VolterraGrid<T>> kind_;
  std::optional<T> norm_hint_;
};

/// Stabilizing operator B(alpha).
///
/// ScalarAlpha evaluates to alpha*I. FiniteDim is the alpha-independent
/// x -> sum_i <x, gamma_i> z_i; its inner product is Euclidean unless
/// quadrature weights are supplied (trapezoid weights for grid functions).
template <std::floating_point T>
class Stabilizer {
 public:
  struct ScalarAlpha {};
  struct FiniteDim {
    std::vector<Vector<T>> gammas;
    std::vector<Vector<T>> zs;
    Vector<T> weights;  // empty: plain dot product
  };

  static Stabilizer scalar_alpha() { return Stabilizer(ScalarAlpha{}); }

  static Stabilizer finite_dim(std::vector<Vector<T>> gammas, std::vector<Vector<T>> zs, Vector<T> weights = {}) {
    detail::require(!gammas.empty() && gammas.size() == zs.size(), Errc::dimension_mismatch,
                    "finite-dimensional stabilizer needs equally many gammas and zs");
    const auto n = gammas.front().size();
    for (std::size_t i = 0; i < gammas.size(); ++i)
      detail::require(gammas[i].size() == n && zs[i].size() == n, Errc::dimension_mismatch,
                      "stabilizer vectors differ in length");
    detail::require(weights.size() == 0 || weights.size() == n, Errc::dimension_mismatch,
                    "inner-product weights differ in length");
    return Stabilizer(FiniteDim{std::move(gammas), std::move(zs), std::move(weights)});
  }

  static Stabilizer finite_dim(const std::vector<BasicGridFunction<T>>& gammas,
                               const std::vector<BasicGridFunction<T>>& zs) {
    detail::require(!gammas.empty(), Errc::dimension_mismatch, "finite-dimensional stabilizer needs vectors");
    std::vector<Vector<T>> g, z;
    for (const auto& f : gammas) g.push_back(f.to_vector());
    for (const auto& f : zs) z.push_back(f.to_vector());
    return finite_dim(std::move(g), std::move(z), trapezoid_weights<T>(gammas.front().size(), gammas.front().h()));
  }

  bool is_scalar_alpha() const noexcept { return std::holds_alternative<ScalarAlpha>(kind_); }
  const FiniteDim& finite_dim_parts() const { return std::get<FiniteDim>(kind_); }

  Matrix<T> assemble(T alpha, std::size_t n) const {
    const auto size = static_cast<Eigen::Index>(n);
    if (is_scalar_alpha()) return alpha * Matrix<T>::Identity(size, size);
    const auto& fd = finite_dim_parts();
    detail::require(fd.gammas.front().size() == size, Errc::dimension_mismatch, "stabilizer size differs from operator");
    Matrix<T> m = Matrix<T>::Zero(size, size);
    for (std::size_t i = 0; i < fd.gammas.size(); ++i) m.noalias() += fd.zs[i] * weighted(fd, fd.gammas[i]).transpose();
    return m;
  }

  Vector<T> apply(T alpha, const Vector<T>& x) const {
    if (is_scalar_alpha()) return alpha * x;
    const auto& fd = finite_dim_parts();
    detail::require(fd.gammas.front().size() == x.size(), Errc::dimension_mismatch, "stabilizer size differs from vector");
    Vector<T> out = Vector<T>::Zero(x.size());
    for (std::size_t i = 0; i < fd.gammas.size(); ++i) out += weighted(fd, fd.gammas[i]).dot(x) * fd.zs[i];
    return out;
  }

  /// d(|alpha|): alpha for ScalarAlpha, spectral norm of the assembled matrix otherwise.
  T norm(T alpha, std::size_t n) const {
    if (is_scalar_alpha()) return std::abs(alpha);
    Eigen::JacobiSVD<Matrix<T>> svd(assemble(alpha, n));
    return svd.singularValues()(0);
  }

 private:
  template <class K>
  explicit Stabilizer(K kind) : kind_(std::move(kind)) {}

  static Vector<T> weighted(const FiniteDim& fd, const Vector<T>& v) {
    return fd.weights.size() == 0 ? v : Vector<T>(fd.weights.cwiseProduct(v));
  }

  std::variant<ScalarAlpha, FiniteDim> kind_;
};

}  // namespace perturbreg
