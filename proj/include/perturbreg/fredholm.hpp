#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "perturbreg/errors.hpp"
#include "perturbreg/grid_function.hpp"
#include "perturbreg/operators.hpp"
#include "perturbreg/regularization.hpp"

namespace perturbreg {

/// Bases of N(A) (phis) and N(A*) (psis) together with the functionals gammas
/// and elements zs of the finite-dimensional stabilizer. Invariants:
/// det[<phi_i, gamma_k>] != 0 and <z_i, psi_k> = delta_ik.
template <std::floating_point T>
struct FredholmBasis {
  std::vector<Vector<T>> phis;
  std::vector<Vector<T>> psis;
  std::vector<Vector<T>> gammas;
  std::vector<Vector<T>> zs;

  std::size_t rank() const noexcept { return phis.size(); }
};

template <std::floating_point T>
struct FredholmStabilizer {
  FredholmBasis<T> basis;
  Stabilizer<T> stabilizer;
};

namespace detail {

template <std::floating_point T>
Matrix<T> columns(const std::vector<Vector<T>>& vs) {
  Matrix<T> m(vs.front().size(), static_cast<Eigen::Index>(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = vs[i];
  return m;
}

template <std::floating_point T>
void require_family(const std::vector<Vector<T>>& vs, std::size_t count, Eigen::Index dim, const char* what) {
  require(vs.size() == count, Errc::dimension_mismatch, what);
  for (const auto& v : vs) require(v.size() == dim, Errc::dimension_mismatch, what);
}

}  // namespace detail

/// Validates the two solvability conditions on an assembled basis.
template <std::floating_point T>
void validate(const FredholmBasis<T>& basis) {
  const std::size_t n = basis.phis.size();
  detail::require(n >= 1, Errc::invalid_argument, "basis needs at least one null vector");
  const Eigen::Index dim = basis.phis.front().size();
  detail::require_family(basis.phis, n, dim, "phis must share one length");
  detail::require_family(basis.psis, n, dim, "psis must match phis in count and length");
  detail::require_family(basis.gammas, n, dim, "gammas must match phis in count and length");
  detail::require_family(basis.zs, n, dim, "zs must match phis in count and length");

  const Matrix<T> phi = detail::columns(basis.phis);
  const Matrix<T> gamma = detail::columns(basis.gammas);
  T scale = 1;
  for (std::size_t i = 0; i < n; ++i) scale *= basis.phis[i].norm() * basis.gammas[i].norm();
  const T det = (phi.transpose() * gamma).determinant();
  if (!(std::abs(det) >= T(1e-12) * scale) || scale == 0)
    throw Error(Errc::degenerate_gram, "det[<phi_i, gamma_k>] vanishes");

  const Matrix<T> cross = detail::columns(basis.zs).transpose() * detail::columns(basis.psis);
  const auto identity = Matrix<T>::Identity(cross.rows(), cross.cols());
  if (!((cross - identity).cwiseAbs().maxCoeff() <= T(1e-10)))
    throw Error(Errc::biorthogonality_failed, "<z_i, psi_k> differs from the identity");
}

/// Builds B = sum_i <., gamma_i> z_i. Omitted gammas default to the phis;
/// omitted zs are the psis biorthogonalized through their Gram matrix.
template <std::floating_point T>
FredholmStabilizer<T> build_stabilizer(std::vector<Vector<T>> phis, std::vector<Vector<T>> psis,
                                       std::optional<std::vector<Vector<T>>> gammas = std::nullopt,
                                       std::optional<std::vector<Vector<T>>> zs = std::nullopt) {
  detail::require(!phis.empty() && phis.size() == psis.size(), Errc::invalid_argument,
                  "phis and psis must be nonempty and equally many");
  detail::require_family(psis, phis.size(), phis.front().size(), "psis must match phis in count and length");

  FredholmBasis<T> basis;
  basis.gammas = gammas ? std::move(*gammas) : phis;
  if (zs) {
    basis.zs = std::move(*zs);
  } else {
    const Matrix<T> psi = detail::columns(psis);
    Eigen::FullPivLU<Matrix<T>> gram(psi.transpose() * psi);
    if (!gram.isInvertible()) throw Error(Errc::biorthogonality_failed, "psis are linearly dependent");
    const Matrix<T> z = psi * gram.inverse();
    for (Eigen::Index i = 0; i < z.cols(); ++i) basis.zs.emplace_back(z.col(i));
  }
  basis.phis = std::move(phis);
  basis.psis = std::move(psis);
  validate(basis);

  auto stabilizer = Stabilizer<T>::finite_dim(basis.gammas, basis.zs);
  return {std::move(basis), std::move(stabilizer)};
}

/// f - sum_i <f, psi_i> z_i, which is orthogonal to every psi_k.
template <std::floating_point T>
Vector<T> project_rhs(const Vector<T>& f, const FredholmBasis<T>& basis) {
  detail::require(!basis.psis.empty() && basis.psis.front().size() == f.size(), Errc::dimension_mismatch,
                  "rhs size differs from basis");
  Vector<T> out = f;
  for (std::size_t i = 0; i < basis.psis.size(); ++i) out -= f.dot(basis.psis[i]) * basis.zs[i];
  return out;
}

/// Solves (A_tilde + B) x = f_tilde - sum_i <f_tilde, psi_i> z_i. The
/// selection functionals <x, gamma_i> vanish for exact data.
template <std::floating_point T>
SolveReport<T> solve_fredholm_regularized(const DiscreteOperator<T>& a_tilde, const FredholmBasis<T>& basis,
                                          const Vector<T>& f_tilde, T delta = 0,
                                          const std::optional<Vector<T>>& x_star = std::nullopt) {
  validate(basis);
  detail::require(static_cast<Eigen::Index>(a_tilde.size()) == basis.phis.front().size(), Errc::dimension_mismatch,
                  "operator size differs from basis");
  const auto stabilizer = Stabilizer<T>::finite_dim(basis.gammas, basis.zs);
  RegConfig<T> config;
  config.delta = delta;
  // The finite-dimensional stabilizer ignores alpha; unit scale is passed through.
  auto report = solve_perturbed(a_tilde, stabilizer, T(1), project_rhs(f_tilde, basis), config, x_star);
  for (const auto& g : basis.gammas) report.selection_functionals.push_back(report.solution.dot(g));
  return report;
}

template <std::floating_point T>
struct NullSpaces {
  std::vector<Vector<T>> phis;  // right singular vectors: N(A)
  std::vector<Vector<T>> psis;  // left singular vectors: N(A*)
};

/// Kernel and cokernel bases from a full SVD; singular values below
/// relative_threshold * sigma_1 count as zero.
template <std::floating_point T>
NullSpaces<T> null_space_bases(const Matrix<T>& a, T relative_threshold = T(1e-10)) {
  detail::require(a.rows() == a.cols() && a.rows() > 0, Errc::dimension_mismatch, "matrix must be square");
  Eigen::JacobiSVD<Matrix<T>> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const T cutoff = relative_threshold * sigma(0);
  NullSpaces<T> out;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) <= cutoff) {
      out.phis.emplace_back(svd.matrixV().col(i));
      out.psis.emplace_back(svd.matrixU().col(i));
    }
  }
  return out;
}

}  // namespace perturbreg
