#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "perturbreg/errors.hpp"
#include "perturbreg/grid_function.hpp"
#include "perturbreg/stable_diff.hpp"

namespace perturbreg::experiment {

inline constexpr std::size_t default_grid_size = 512;
inline constexpr std::uint64_t default_seed = 42;

struct ExampleValue {
  double y;
  double dy;
};

/// Interval [a, b] of the benchmark function.
inline std::pair<double, double> example_interval(int id) {
  switch (id) {
    case 1: return {0.0, 3.0};
    case 2: return {0.0, 5.0};
    default: throw Error(Errc::unknown_example, "example id must be 1 or 2");
  }
}

/// Benchmark functions and their exact derivatives:
///   1: y = sin(pi t/4) / (t^3 + 1) on [0, 3]
///   2: y = cos(pi t/8) exp(-t^2)   on [0, 5]
inline ExampleValue example_function(int id, double t) {
  using std::numbers::pi;
  switch (id) {
    case 1: {
      const double den = t * t * t + 1;
      const double s = std::sin(pi * t / 4), c = std::cos(pi * t / 4);
      return {s / den, -3 * t * t / (den * den) * s + pi / (4 * den) * c};
    }
    case 2: {
      const double g = std::exp(-t * t);
      const double s = std::sin(pi * t / 8), c = std::cos(pi * t / 8);
      return {c * g, -g * (pi / 8 * s + 2 * t * c)};
    }
    default: throw Error(Errc::unknown_example, "example id must be 1 or 2");
  }
}

/// Zero-mean, unit-variance noise families. uniform_unit draws from
/// U(-sqrt 3, sqrt 3) and is the default.
enum class NoiseDistribution { uniform_unit, gaussian_unit };

struct NoiseSpec {
  double delta = 0;
  std::uint64_t seed = default_seed;
  NoiseDistribution distribution = NoiseDistribution::uniform_unit;
};

/// R_0..R_{n-1}: i.i.d. zero-mean, unit-variance draws for a fixed seed.
inline std::vector<double> unit_noise(std::size_t n, std::uint64_t seed,
                                      NoiseDistribution distribution = NoiseDistribution::uniform_unit) {
  std::mt19937_64 engine(seed);
  std::vector<double> r(n);
  if (distribution == NoiseDistribution::gaussian_unit) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : r) v = normal(engine);
  } else {
    const double half_width = std::sqrt(3.0);
    std::uniform_real_distribution<double> uniform(-half_width, half_width);
    for (double& v : r) v = uniform(engine);
  }
  return r;
}

/// y_i + delta * R_i.
inline GridFunction add_noise(const GridFunction& y, const NoiseSpec& spec) {
  detail::require(spec.delta >= 0 && std::isfinite(spec.delta), Errc::invalid_argument,
                  "noise level must be non-negative");
  if (spec.delta == 0) return y;
  const auto r = unit_noise(y.size(), spec.seed, spec.distribution);
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = y[i] + spec.delta * r[i];
  return y.with_values(std::move(out));
}

struct ExperimentReport {
  int example_id;
  std::size_t n;
  double delta;
  double alpha;
  std::uint64_t seed;
  double max_error_full;
  double max_error_interior;  // over t >= a + 3 alpha; NaN when that set is empty
  GridFunction noisy;
  GridFunction derivative;
  GridFunction exact_derivative;
  DerivativeResult<double> result;
};

inline GridFunction sample_example(int id, std::size_t n, bool derivative = false) {
  const auto [a, b] = example_interval(id);
  return GridFunction::sample(a, b, n, [&](double t) {
    const auto v = example_function(id, t);
    return derivative ? v.dy : v.y;
  });
}

struct ExperimentOptions {
  NoiseDistribution distribution = NoiseDistribution::uniform_unit;
  KernelQuadrature quadrature = KernelQuadrature::trapezoid;
};

/// Samples the example on n points, adds seeded noise of level delta, and
/// differentiates with an auto-estimated baseline (alpha defaults to sqrt(delta)).
inline ExperimentReport run_experiment(int id, double delta, std::uint64_t seed,
                                       std::size_t n = default_grid_size,
                                       std::optional<double> alpha = std::nullopt,
                                       const ExperimentOptions& options = {}) {
  if (!(delta > 0)) throw Error(Errc::degenerate_delta, "experiment noise level must be positive");
  const double alpha_used = alpha.value_or(std::sqrt(delta));
  auto clean = sample_example(id, n);
  auto exact = sample_example(id, n, true);
  auto noisy = add_noise(clean, {delta, seed, options.distribution});
  auto result = regularized_derivative<double>(noisy, alpha_used, AutoBaseline<double>{}, options.quadrature);

  double full = 0;
  double interior = -1;
  const double edge = noisy.a() + result.boundary_layer_width;
  for (std::size_t i = 0; i < n; ++i) {
    const double err = std::abs(result.derivative[i] - exact[i]);
    full = std::max(full, err);
    if (noisy.t(i) >= edge) interior = std::max(interior, err);
  }
  if (interior < 0) interior = std::numeric_limits<double>::quiet_NaN();

  auto derivative = result.derivative;
  return {id,    n,        delta,     alpha_used,           seed, full, interior, std::move(noisy),
          std::move(derivative), std::move(exact), std::move(result)};
}

inline double median(std::vector<double> values) {
  detail::require(!values.empty(), Errc::invalid_argument, "median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2;
}

struct ConvergenceRow {
  double delta;
  double alpha;
  std::size_t seed_count;
  double median_max_error_full;
  double median_max_error_interior;
};

/// Runs every (delta, seed) pair and aggregates medians per delta.
inline std::vector<ConvergenceRow> convergence_study(int id, const std::vector<double>& deltas,
                                                     const std::vector<std::uint64_t>& seeds,
                                                     std::size_t n = default_grid_size,
                                                     const ExperimentOptions& options = {}) {
  example_interval(id);
  detail::require(!deltas.empty(), Errc::invalid_argument, "convergence study needs at least one delta");
  detail::require(!seeds.empty(), Errc::invalid_argument, "convergence study needs at least one seed");
  std::vector<ConvergenceRow> rows;
  for (double delta : deltas) {
    std::vector<double> full, interior;
    double alpha = 0;
    for (auto seed : seeds) {
      const auto r = run_experiment(id, delta, seed, n, std::nullopt, options);
      full.push_back(r.max_error_full);
      interior.push_back(r.max_error_interior);
      alpha = r.alpha;
    }
    rows.push_back({delta, alpha, seeds.size(), median(std::move(full)), median(std::move(interior))});
  }
  return rows;
}

}  // namespace perturbreg::experiment
