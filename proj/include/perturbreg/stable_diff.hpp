#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "perturbreg/errors.hpp"
#include "perturbreg/grid_function.hpp"

namespace perturbreg {

/// Estimates of y(a) and y'(a) removed from the data before inversion.
template <std::floating_point T>
struct Baseline {
  enum class Source { user_supplied, auto_estimated };

  T c = 0;
  T d = 0;
  Source source = Source::user_supplied;
  T window_width = 0;  // > 0 when auto-estimated

  static Baseline user(T c, T d) { return {c, d, Source::user_supplied, T(0)}; }
};

/// Request for a least-squares baseline; the window defaults to max(2h, alpha).
template <std::floating_point T>
struct AutoBaseline {
  std::optional<T> window;
};

template <std::floating_point T>
using BaselineChoice = std::variant<Baseline<T>, AutoBaseline<T>>;

template <std::floating_point T>
struct DerivativeResult {
  BasicGridFunction<T> x_alpha;     // regularized solution of the integral equation
  BasicGridFunction<T> derivative;  // x_alpha + d
  T alpha;
  Baseline<T> baseline;
  T boundary_layer_width;  // 3 alpha
  bool alpha_too_small;    // alpha < h: the resolvent kernel is not resolved by the grid
};

/// How the exponential convolution in the resolvent is discretized.
///
/// trapezoid: composite trapezoid rule on the product kernel * g. Second
/// order while alpha resolves the grid; degrades once h/alpha is O(1).
/// linear_exact: the kernel integrated exactly against the piecewise-linear
/// interpolant of g. Reduces to x_i = E x_{i-1} + (1 - E)(g_i - g_{i-1})/h,
/// which stays bounded for every alpha and tends to the backward difference
/// as alpha -> 0.
enum class KernelQuadrature { trapezoid, linear_exact };

/// True when the exponential kernel of width alpha is resolved by step h.
template <std::floating_point T>
bool resolves_grid(T alpha, T h) {
  return alpha >= h;
}

/// Trapezoidal cumulative integral int_a^t x(s) ds; out[0] = 0.
template <std::floating_point T>
BasicGridFunction<T> volterra_apply(const BasicGridFunction<T>& x) {
  const T h = x.h();
  std::vector<T> out(x.size());
  out[0] = 0;
  for (std::size_t i = 1; i < x.size(); ++i) out[i] = out[i - 1] + h / 2 * (x[i - 1] + x[i]);
  return x.with_values(std::move(out));
}

/// Applies the closed-form inverse of (A + alpha I) for the integration operator:
///
///   x(t) = g(t)/alpha - 1/alpha^2 * int_a^t exp(-(t-s)/alpha) g(s) ds.
///
/// The convolution is the trapezoid sum on each panel, carried forward by
///   w_i = E w_{i-1} + h/2 (g_i + E g_{i-1}),  E = exp(-h/alpha),
/// which is O(n) and stable since E <= 1.
template <std::floating_point T>
BasicGridFunction<T> resolvent_apply(const BasicGridFunction<T>& g, T alpha,
                                     KernelQuadrature rule = KernelQuadrature::trapezoid) {
  detail::require(alpha > 0 && std::isfinite(alpha), Errc::invalid_argument, "alpha must be positive");
  const T h = g.h();
  const T decay = std::exp(-h / alpha);
  const T inv = 1 / alpha;
  std::vector<T> out(g.size());
  out[0] = g[0] * inv;
  if (rule == KernelQuadrature::linear_exact) {
    const T gain = -std::expm1(-h / alpha);
    for (std::size_t i = 1; i < g.size(); ++i) out[i] = decay * out[i - 1] + gain * (g[i] - g[i - 1]) / h;
    return g.with_values(std::move(out));
  }
  T w = 0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    w = decay * w + h / 2 * (g[i] + decay * g[i - 1]);
    out[i] = g[i] * inv - w * inv * inv;
  }
  return g.with_values(std::move(out));
}

/// (1/alpha)(2 - exp(-(b-a)/alpha)), a sup-norm bound on the resolvent that
/// stays below 2/alpha.
template <std::floating_point T>
T resolvent_norm_bound(T alpha, T a, T b) {
  detail::require(alpha > 0 && b > a, Errc::invalid_argument, "norm bound needs alpha > 0 and b > a");
  return (2 - std::exp(-(b - a) / alpha)) / alpha;
}

/// Least-squares line through the samples in [a, a + window_width];
/// c is its value at a, d its slope.
template <std::floating_point T>
Baseline<T> estimate_baseline(const BasicGridFunction<T>& y, T window_width) {
  detail::require(window_width > 0 && std::isfinite(window_width), Errc::window_too_narrow,
                  "baseline window must be positive");
  const T h = y.h();
  const auto span = static_cast<std::size_t>(std::floor(window_width / h * (1 + T(1e-12))));
  const std::size_t m = std::min(y.size(), span + 1);
  if (m < 2) throw Error(Errc::window_too_narrow, "baseline window holds fewer than two samples");

  T s_mean = 0, y_mean = 0;
  for (std::size_t i = 0; i < m; ++i) {
    s_mean += y.t(i) - y.a();
    y_mean += y[i];
  }
  s_mean /= static_cast<T>(m);
  y_mean /= static_cast<T>(m);
  T sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const T ds = y.t(i) - y.a() - s_mean;
    sxy += ds * (y[i] - y_mean);
    sxx += ds * ds;
  }
  const T d = sxy / sxx;
  return {y_mean - d * s_mean, d, Baseline<T>::Source::auto_estimated, window_width};
}

/// Stable derivative of noisy samples: subtract the baseline line, invert
/// (A + alpha I) in closed form, and add the baseline slope back.
template <std::floating_point T>
DerivativeResult<T> regularized_derivative(const BasicGridFunction<T>& y_tilde, T alpha,
                                           const BaselineChoice<T>& choice = AutoBaseline<T>{},
                                           KernelQuadrature rule = KernelQuadrature::trapezoid) {
  detail::require(alpha > 0 && std::isfinite(alpha), Errc::invalid_argument, "alpha must be positive");
  Baseline<T> baseline;
  if (const auto* fixed = std::get_if<Baseline<T>>(&choice)) {
    baseline = *fixed;
  } else {
    const auto& request = std::get<AutoBaseline<T>>(choice);
    baseline = estimate_baseline(y_tilde, request.window.value_or(std::max(2 * y_tilde.h(), alpha)));
  }

  std::vector<T> f(y_tilde.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = y_tilde[i] - baseline.c - baseline.d * (y_tilde.t(i) - y_tilde.a());
  auto x_alpha = resolvent_apply(y_tilde.with_values(std::move(f)), alpha, rule);

  std::vector<T> dy(x_alpha.data());
  for (T& v : dy) v += baseline.d;
  auto derivative = x_alpha.with_values(std::move(dy));
  return {std::move(x_alpha), std::move(derivative), alpha, baseline, 3 * alpha,
          !resolves_grid(alpha, y_tilde.h())};
}

}  // namespace perturbreg
