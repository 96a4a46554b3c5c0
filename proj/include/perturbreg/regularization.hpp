#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/QR>

#include "perturbreg/errors.hpp"
#include "perturbreg/grid_function.hpp"
#include "perturbreg/operators.hpp"

namespace perturbreg {

/// Rule tying the regularization parameter to the noise level.
struct CoordinationRule {
  enum class Kind { sqrt_delta, power_delta, fixed };

  Kind kind = Kind::sqrt_delta;
  double parameter = 0.5;  // exponent for power_delta, alpha for fixed

  static CoordinationRule sqrt_delta() { return {Kind::sqrt_delta, 0.5}; }
  static CoordinationRule power_delta(double p) {
    detail::require(p > 0 && p < 1, Errc::invalid_argument, "power rule exponent must lie in (0, 1)");
    return {Kind::power_delta, p};
  }
  static CoordinationRule fixed(double alpha) {
    detail::require(alpha > 0 && std::isfinite(alpha), Errc::invalid_argument, "fixed alpha must be positive");
    return {Kind::fixed, alpha};
  }
};

/// alpha(delta) for the given rule. sqrt and power rules satisfy delta*c(alpha) -> 0
/// whenever c(alpha) = O(1/alpha), which is the case for the integration operator.
template <std::floating_point T>
T coordinate_alpha(T delta, const CoordinationRule& rule) {
  if (!(delta > 0) || !std::isfinite(delta)) throw Error(Errc::degenerate_delta, "noise level must be positive");
  switch (rule.kind) {
    case CoordinationRule::Kind::sqrt_delta: return std::sqrt(delta);
    case CoordinationRule::Kind::power_delta: return std::pow(delta, static_cast<T>(rule.parameter));
    case CoordinationRule::Kind::fixed: return static_cast<T>(rule.parameter);
  }
  return std::sqrt(delta);
}

template <std::floating_point T>
struct RegConfig {
  T delta = 0;
  std::optional<T> alpha;
  std::optional<CoordinationRule> rule;
  T q_max = T(0.5);

  /// Explicit alpha wins; otherwise the rule is applied to delta.
  T resolve_alpha() const {
    if (alpha) {
      detail::require(*alpha > 0 && std::isfinite(*alpha), Errc::invalid_argument, "alpha must be positive");
      return *alpha;
    }
    detail::require(rule.has_value(), Errc::invalid_argument, "config needs either alpha or a coordination rule");
    return coordinate_alpha(delta, *rule);
  }
};

template <std::floating_point T>
struct BoundComponents {
  T gap;            // S(alpha, x*)
  T amplification;  // delta*c / (1 - q)
  T x_star_norm;
};

template <std::floating_point T>
struct SolveReport {
  Vector<T> solution;
  T residual_norm = 0;
  T c_alpha_est = 0;  // sup-norm of the inverse of the assembled system
  T q_est = 0;        // delta * c_alpha_est
  bool q_exceeded = false;
  std::optional<T> observed_error;  // |x - x*|_inf when x* is known
  std::optional<T> c_exact;         // resolvent norm of the exact operator
  std::optional<T> gap;
  std::optional<T> bound;
  std::optional<BoundComponents<T>> bound_components;
  std::vector<T> selection_functionals;  // <x, gamma_i> for finite-dimensional stabilizers
};

/// q = delta * c(|alpha|). The caller compares it with its safety threshold.
template <std::floating_point T>
T invertibility_margin(T delta, T c_alpha) {
  detail::require(delta >= 0 && c_alpha >= 0, Errc::invalid_argument, "margin inputs must be non-negative");
  return delta * c_alpha;
}

/// S + delta*c/(1-q) * (1 + |x*| + S): a priori bound on the regularized error.
template <std::floating_point T>
T error_bound(T gap, T delta, T c_alpha, T q, T x_star_norm) {
  if (!(q >= 0) || !(q < 1)) throw Error(Errc::q_out_of_range, "error bound needs 0 <= q < 1");
  detail::require(gap >= 0 && delta >= 0 && c_alpha >= 0 && x_star_norm >= 0, Errc::invalid_argument,
                  "error bound inputs must be non-negative");
  const T amplification = delta * c_alpha / (1 - q);
  return gap + amplification * (1 + x_star_norm + gap);
}

namespace detail {

template <std::floating_point T>
Eigen::PartialPivLU<Matrix<T>> factor(const Matrix<T>& m) {
  Eigen::PartialPivLU<Matrix<T>> lu(m);
  const T rcond = lu.rcond();
  const T floor = static_cast<T>(m.rows()) * std::numeric_limits<T>::epsilon();
  if (!(rcond > floor)) throw Error(Errc::singular_system, "assembled system is numerically singular");
  return lu;
}

template <std::floating_point T>
Matrix<T> assemble(const DiscreteOperator<T>& a, const Stabilizer<T>& b, T alpha) {
  return a.to_dense() + b.assemble(alpha, a.size());
}

template <std::floating_point T>
T inverse_sup_norm(const Eigen::PartialPivLU<Matrix<T>>& lu) {
  return lu.inverse().cwiseAbs().rowwise().sum().maxCoeff();
}

template <std::floating_point T>
void require_alpha(T alpha) {
  require(alpha > 0 && std::isfinite(alpha), Errc::invalid_argument, "alpha must be positive");
}

}  // namespace detail

/// c(|alpha|) for A + B(alpha): the analytic 2/alpha for the integration
/// operator with alpha*I, the exact sup-norm of the dense inverse otherwise.
template <std::floating_point T>
T resolvent_norm_estimate(const DiscreteOperator<T>& a, const Stabilizer<T>& b, T alpha) {
  detail::require_alpha(alpha);
  if (a.is_volterra() && b.is_scalar_alpha()) return 2 / alpha;
  return detail::inverse_sup_norm(detail::factor(detail::assemble(a, b, alpha)));
}

/// S(alpha, x*) = |(A + B(alpha))^{-1} B(alpha) x*|_inf.
template <std::floating_point T>
T stabilization_gap(const DiscreteOperator<T>& a, const Stabilizer<T>& b, T alpha, const Vector<T>& x_star) {
  detail::require_alpha(alpha);
  detail::require(static_cast<std::size_t>(x_star.size()) == a.size(), Errc::dimension_mismatch,
                  "x* size differs from operator");
  const auto lu = detail::factor(detail::assemble(a, b, alpha));
  return sup_norm<T>(lu.solve(b.apply(alpha, x_star)));
}

template <std::floating_point T>
struct SweepPoint {
  T alpha;
  T gap;
};

/// One stabilization gap per alpha, in input order. Monotonicity is left for
/// the caller to judge.
template <std::floating_point T>
std::vector<SweepPoint<T>> stabilization_sweep(const DiscreteOperator<T>& a, const Stabilizer<T>& b,
                                               const std::vector<T>& alphas, const Vector<T>& x_star) {
  std::vector<SweepPoint<T>> out;
  out.reserve(alphas.size());
  for (T alpha : alphas) out.push_back({alpha, stabilization_gap(a, b, alpha, x_star)});
  return out;
}

template <std::floating_point T>
struct ChainResult {
  std::vector<Vector<T>> xs;  // x_1 .. x_{n-1}
  std::vector<T> residuals;   // |A x_i - B x_{i-1}|_inf
};

/// Least-squares chain A x_i = B x_{i-1}, i = 1..n-1, with B taken at unit
/// scale. Large residuals mean the chain hypothesis fails at that step.
template <std::floating_point T>
ChainResult<T> chain_solve(const DiscreteOperator<T>& a, const Stabilizer<T>& b, const Vector<T>& x0, int n) {
  detail::require(n >= 1, Errc::invalid_argument, "chain length must be at least 1");
  detail::require(static_cast<std::size_t>(x0.size()) == a.size(), Errc::dimension_mismatch,
                  "x0 size differs from operator");
  ChainResult<T> out;
  if (n == 1) return out;
  const Matrix<T> m = a.to_dense();
  Eigen::CompleteOrthogonalDecomposition<Matrix<T>> cod(m);
  Vector<T> prev = x0;
  for (int i = 1; i < n; ++i) {
    const Vector<T> rhs = b.apply(T(1), prev);
    Vector<T> x = cod.solve(rhs);
    detail::require(x.allFinite(), Errc::singular_system, "least-squares chain step failed");
    out.residuals.push_back(sup_norm<T>(m * x - rhs));
    out.xs.push_back(x);
    prev = std::move(x);
  }
  return out;
}

/// Solves (A_tilde + B(alpha)) x = f_tilde by dense LU and reports the
/// quantities entering the error analysis. With both x* and the exact
/// operator, the gap and the a priori bound are filled in (the bound only
/// while delta*c of the exact operator stays below 1).
template <std::floating_point T>
SolveReport<T> solve_perturbed(const DiscreteOperator<T>& a_tilde, const Stabilizer<T>& b, T alpha,
                               const Vector<T>& f_tilde, const RegConfig<T>& config,
                               const std::optional<Vector<T>>& x_star = std::nullopt,
                               const std::optional<DiscreteOperator<T>>& a_exact = std::nullopt) {
  detail::require_alpha(alpha);
  detail::require(config.delta >= 0, Errc::invalid_argument, "noise level must be non-negative");
  const std::size_t n = a_tilde.size();
  detail::require(static_cast<std::size_t>(f_tilde.size()) == n, Errc::dimension_mismatch,
                  "right-hand side size differs from operator");
  if (x_star)
    detail::require(static_cast<std::size_t>(x_star->size()) == n, Errc::dimension_mismatch,
                    "x* size differs from operator");
  if (a_exact)
    detail::require(a_exact->size() == n, Errc::dimension_mismatch, "exact operator size differs");

  const Matrix<T> system = detail::assemble(a_tilde, b, alpha);
  const auto lu = detail::factor(system);

  SolveReport<T> report;
  report.solution = lu.solve(f_tilde);
  detail::require(report.solution.allFinite(), Errc::singular_system, "solution is not finite");
  report.residual_norm = sup_norm<T>(system * report.solution - f_tilde);
  report.c_alpha_est = (a_tilde.is_volterra() && b.is_scalar_alpha()) ? 2 / alpha : detail::inverse_sup_norm(lu);
  report.q_est = invertibility_margin(config.delta, report.c_alpha_est);
  report.q_exceeded = report.q_est >= config.q_max;

  if (x_star) report.observed_error = sup_norm<T>(report.solution - *x_star);
  if (x_star && a_exact) {
    const T c_exact = resolvent_norm_estimate(*a_exact, b, alpha);
    const T gap = stabilization_gap(*a_exact, b, alpha, *x_star);
    const T q = invertibility_margin(config.delta, c_exact);
    report.c_exact = c_exact;
    report.gap = gap;
    if (q < 1) {
      const T x_norm = sup_norm<T>(*x_star);
      report.bound = error_bound(gap, config.delta, c_exact, q, x_norm);
      report.bound_components = BoundComponents<T>{gap, config.delta * c_exact / (1 - q), x_norm};
    }
  }
  return report;
}

}  // namespace perturbreg
