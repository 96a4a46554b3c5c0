#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "perturbreg/grid_function.hpp"

namespace perturbreg::testing {

inline Vector<double> random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector<double> v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

inline Matrix<double> random_matrix(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix<double> m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = u(rng);
  return m;
}

/// Matrix with unit infinity norm (max absolute row sum).
inline Matrix<double> unit_inf_norm(Matrix<double> m) {
  return m / m.cwiseAbs().rowwise().sum().maxCoeff();
}

inline double inf_norm(const Matrix<double>& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

inline Vector<double> nodes(double a, double b, std::size_t n) {
  Vector<double> t(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) t(static_cast<Eigen::Index>(i)) = GridFunction::node(a, b, n, i);
  return t;
}

}  // namespace perturbreg::testing
