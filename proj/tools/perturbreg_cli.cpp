// perturbreg: stable differentiation and regularized solves from the command line.
//
//   perturbreg differentiate data.csv --delta 1e-3 --rule sqrt --out dy.csv
//   perturbreg solve problem.json --out report.json
//   perturbreg experiment --example 1 --deltas 0.1,0.01,0.001 --seeds 21 --out runs/
//   perturbreg sweep problem.json --alphas 0.1,0.01,0.001 --out sweep.csv
//
// Exit codes: 0 ok, 2 bad input or flags, 3 non-uniform grid,
// 4 alpha below grid step under --strict, 5 singular system.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "perturbreg/experiment.hpp"
#include "perturbreg/io/csv.hpp"
#include "perturbreg/io/problem_file.hpp"
#include "perturbreg/perturbreg.hpp"

namespace fs = std::filesystem;
using namespace perturbreg;

namespace {

enum Exit : int { ok = 0, bad_input = 2, non_uniform = 3, alpha_too_small = 4, singular = 5 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const std::optional<std::string>& out, const std::string& contents) {
  if (out) {
    io::write_file_atomic(*out, contents);
  } else {
    std::cout << contents;
  }
}

KernelQuadrature parse_quadrature(const std::string& name) {
  if (name == "trapezoid") return KernelQuadrature::trapezoid;
  if (name == "linear_exact") return KernelQuadrature::linear_exact;
  throw UsageError("unknown quadrature '" + name + "'");
}

experiment::NoiseDistribution parse_noise(const std::string& name) {
  if (name == "uniform") return experiment::NoiseDistribution::uniform_unit;
  if (name == "gaussian") return experiment::NoiseDistribution::gaussian_unit;
  throw UsageError("unknown noise distribution '" + name + "'");
}

// ---------------------------------------------------------------------------
// differentiate

struct DifferentiateArgs {
  std::string input;
  std::optional<double> delta;
  std::optional<double> alpha;
  std::optional<std::string> rule;
  std::string baseline = "auto";
  std::optional<double> window;
  std::optional<std::string> out;
  std::string quadrature = "trapezoid";
  bool strict = false;
};

int differentiate(const DifferentiateArgs& args) {
  const auto samples = io::read_samples(fs::path(args.input));

  double alpha = 0;
  if (args.alpha) {
    alpha = *args.alpha;
    if (!(alpha > 0)) throw UsageError("--alpha must be positive");
  } else {
    if (!args.delta) throw UsageError("need --alpha, or --delta with an optional --rule");
    if (!(*args.delta > 0)) throw UsageError("--delta must be positive");
    try {
      alpha = coordinate_alpha(*args.delta, io::parse_rule(args.rule.value_or("sqrt")));
    } catch (const io::ProblemError& e) {
      throw UsageError(e.what());
    }
  }

  BaselineChoice<double> baseline = AutoBaseline<double>{args.window};
  if (args.baseline != "auto") {
    const auto comma = args.baseline.find(',');
    if (comma == std::string::npos) throw UsageError("--baseline must be 'auto' or 'c,d'");
    try {
      baseline = Baseline<double>::user(io::parse_real(args.baseline.substr(0, comma)),
                                        io::parse_real(args.baseline.substr(comma + 1)));
    } catch (const io::CsvError&) {
      throw UsageError("--baseline must be 'auto' or 'c,d'");
    }
  }

  const auto result = regularized_derivative(samples, alpha, baseline, parse_quadrature(args.quadrature));
  std::cerr << "alpha = " << io::format_real(result.alpha) << '\n';
  if (args.delta) std::cerr << "q proxy (2 delta/alpha) = " << io::format_real(2 * *args.delta / alpha) << '\n';
  std::cerr << "boundary layer width = " << io::format_real(result.boundary_layer_width) << '\n';
  if (result.alpha_too_small) {
    std::cerr << "warning: alpha is below the grid step; the resolvent kernel is not resolved\n";
    if (args.strict) return alpha_too_small;
  }

  std::vector<double> t(samples.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = samples.t(i);
  std::ostringstream csv;
  io::write_table(csv, {"t", "dy", "x_alpha"}, {t, result.derivative.data(), result.x_alpha.data()});
  emit(args.out, csv.str());
  return ok;
}

// ---------------------------------------------------------------------------
// solve

int solve(const std::string& problem_path, const std::optional<std::string>& out) {
  const auto problem = io::read_problem(problem_path);
  if (!problem.rhs) throw io::ProblemError("solve needs 'rhs'");

  SolveReport<double> report;
  double alpha = 1;
  if (problem.fredholm) {
    report = solve_fredholm_regularized(problem.op, *problem.fredholm, *problem.rhs, problem.config.delta,
                                        problem.exact_solution);
  } else {
    alpha = problem.config.resolve_alpha();
    std::optional<DiscreteOperator<double>> exact_op;
    if (problem.exact_solution) exact_op = problem.reference_operator();
    report = solve_perturbed(problem.op, problem.stabilizer, alpha, *problem.rhs, problem.config,
                             problem.exact_solution, exact_op);
  }
  emit(out, io::to_json(report, alpha, problem.config.delta).dump(2) + "\n");
  if (report.q_exceeded)
    std::cerr << "warning: q = " << io::format_real(report.q_est) << " is at or above q_max\n";
  return ok;
}

// ---------------------------------------------------------------------------
// sweep

int sweep(const std::string& problem_path, const std::vector<double>& alphas, const std::optional<std::string>& out) {
  if (alphas.empty()) throw UsageError("--alphas must list at least one value");
  for (double a : alphas)
    if (!(a > 0)) throw UsageError("--alphas must be positive");
  const auto problem = io::read_problem(problem_path);
  if (!problem.exact_solution) throw io::ProblemError("sweep needs 'exact_solution'");

  const auto& op = problem.reference_operator();
  const auto points = stabilization_sweep(op, problem.stabilizer, alphas, *problem.exact_solution);
  std::vector<double> col_alpha, col_gap, col_c, col_q;
  for (const auto& p : points) {
    const double c = resolvent_norm_estimate(op, problem.stabilizer, p.alpha);
    col_alpha.push_back(p.alpha);
    col_gap.push_back(p.gap);
    col_c.push_back(c);
    col_q.push_back(invertibility_margin(problem.config.delta, c));
  }
  std::ostringstream csv;
  io::write_table(csv, {"alpha", "S", "c_alpha_est", "q_est"}, {col_alpha, col_gap, col_c, col_q});
  emit(out, csv.str());
  return ok;
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentArgs {
  int example = 1;
  std::vector<double> deltas{0.1, 0.01, 0.001};
  int seeds = 1;
  std::uint64_t seed = experiment::default_seed;
  std::size_t n = experiment::default_grid_size;
  std::string out;
  std::string noise = "uniform";
  std::string quadrature = "trapezoid";
};

std::vector<double> grid_nodes(const GridFunction& g) {
  std::vector<double> t(g.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = g.t(i);
  return t;
}

int run_experiments(const ExperimentArgs& args) {
  if (args.example != 1 && args.example != 2) throw UsageError("--example must be 1 or 2");
  if (args.deltas.empty()) throw UsageError("--deltas must list at least one value");
  for (double d : args.deltas)
    if (!(d > 0)) throw UsageError("--deltas must be positive");
  if (args.seeds < 1) throw UsageError("--seeds must be at least 1");
  if (args.n < 2) throw UsageError("--n must be at least 2");

  const experiment::ExperimentOptions options{parse_noise(args.noise), parse_quadrature(args.quadrature)};
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < args.seeds; ++k) seeds.push_back(args.seed + static_cast<std::uint64_t>(k));

  const fs::path dir(args.out);
  fs::create_directories(dir);

  double largest = args.deltas.front();
  for (double d : args.deltas) largest = std::max(largest, d);

  for (double delta : args.deltas) {
    for (auto seed : seeds) {
      const auto r = experiment::run_experiment(args.example, delta, seed, args.n, std::nullopt, options);
      const auto stem = "e" + std::to_string(args.example) + "_d" + io::format_real(delta) + "_s" + std::to_string(seed);
      const auto t = grid_nodes(r.noisy);
      io::write_table_file(dir / ("input_" + stem + ".csv"), {"t", "y"}, {t, r.noisy.data()});
      io::write_table_file(dir / ("run_" + stem + ".csv"), {"t", "dy", "x_alpha"},
                           {t, r.derivative.data(), r.result.x_alpha.data()});
      if (delta == largest && seed == seeds.front()) {
        std::vector<double> err(t.size());
        for (std::size_t i = 0; i < err.size(); ++i) err[i] = r.derivative[i] - r.exact_derivative[i];
        io::write_table_file(dir / "plot.csv", {"t", "exact", "computed", "error"},
                             {t, r.exact_derivative.data(), r.derivative.data(), err});
      }
    }
  }

  const auto rows = experiment::convergence_study(args.example, args.deltas, seeds, args.n, options);
  std::vector<std::vector<double>> cols(5);
  for (const auto& row : rows) {
    cols[0].push_back(row.delta);
    cols[1].push_back(row.alpha);
    cols[2].push_back(static_cast<double>(row.seed_count));
    cols[3].push_back(row.median_max_error_full);
    cols[4].push_back(row.median_max_error_interior);
  }
  io::write_table_file(dir / "table.csv",
                       {"delta", "alpha", "seed_count", "median_max_error_full", "median_max_error_interior"}, cols);
  for (const auto& row : rows)
    std::cerr << "delta " << io::format_real(row.delta) << ": median max error " << io::format_real(row.median_max_error_full)
              << " (interior " << io::format_real(row.median_max_error_interior) << ")\n";
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perturbation-method regularization: stable differentiation and regularized linear solves"};
  app.require_subcommand(1);

  DifferentiateArgs diff;
  auto* cmd_diff = app.add_subcommand("differentiate", "Differentiate noisy samples from a t,y CSV");
  cmd_diff->add_option("input", diff.input, "Input CSV with header t,y")->required();
  cmd_diff->add_option("--delta", diff.delta, "Noise level");
  cmd_diff->add_option("--alpha", diff.alpha, "Regularization parameter");
  cmd_diff->add_option("--rule", diff.rule, "Coordination rule: sqrt | power:p | fixed:a");
  cmd_diff->add_option("--baseline", diff.baseline, "'auto' or 'c,d'");
  cmd_diff->add_option("--window", diff.window, "Baseline fit window width");
  cmd_diff->add_option("--out", diff.out, "Output CSV (stdout if omitted)");
  cmd_diff->add_option("--quadrature", diff.quadrature, "trapezoid | linear_exact");
  cmd_diff->add_flag("--strict", diff.strict, "Fail when alpha is below the grid step");

  std::string problem_path;
  std::optional<std::string> solve_out;
  auto* cmd_solve = app.add_subcommand("solve", "Solve a regularized problem described by a JSON file");
  cmd_solve->add_option("problem", problem_path, "Problem file")->required();
  cmd_solve->add_option("--out", solve_out, "Report JSON (stdout if omitted)");

  ExperimentArgs exp;
  auto* cmd_exp = app.add_subcommand("experiment", "Run the benchmark differentiation experiments");
  cmd_exp->add_option("--example", exp.example, "Example id (1 or 2)");
  cmd_exp->add_option("--deltas", exp.deltas, "Noise levels")->delimiter(',');
  cmd_exp->add_option("--seeds", exp.seeds, "Number of seeds per noise level");
  cmd_exp->add_option("--seed", exp.seed, "First seed")->envname("PERTURBREG_SEED");
  cmd_exp->add_option("--n", exp.n, "Grid size");
  cmd_exp->add_option("--out", exp.out, "Output directory")->required();
  cmd_exp->add_option("--noise", exp.noise, "uniform | gaussian");
  cmd_exp->add_option("--quadrature", exp.quadrature, "trapezoid | linear_exact");

  std::string sweep_path;
  std::vector<double> alphas;
  std::optional<std::string> sweep_out;
  auto* cmd_sweep = app.add_subcommand("sweep", "Stabilization gap over a list of alphas");
  cmd_sweep->add_option("problem", sweep_path, "Problem file with exact_solution")->required();
  cmd_sweep->add_option("--alphas", alphas, "Regularization parameters")->delimiter(',');
  cmd_sweep->add_option("--out", sweep_out, "Output CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return bad_input;
  }

  try {
    if (cmd_diff->parsed()) return differentiate(diff);
    if (cmd_solve->parsed()) return solve(problem_path, solve_out);
    if (cmd_exp->parsed()) return run_experiments(exp);
    if (cmd_sweep->parsed()) return sweep(sweep_path, alphas, sweep_out);
  } catch (const io::CsvError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == io::CsvError::Kind::non_uniform ? non_uniform : bad_input;
  } catch (const io::ProblemError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bad_input;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bad_input;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == Errc::singular_system ? singular : bad_input;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bad_input;
  }
  return bad_input;
}
