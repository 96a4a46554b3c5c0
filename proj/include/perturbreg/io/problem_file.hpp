#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "perturbreg/fredholm.hpp"
#include "perturbreg/operators.hpp"
#include "perturbreg/regularization.hpp"

namespace perturbreg::io {

/// Schema violation in a problem file; raised before any numerics run.
class ProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Problem {
  DiscreteOperator<double> op = DiscreteOperator<double>::volterra(0, 1, 2);
  Stabilizer<double> stabilizer = Stabilizer<double>::scalar_alpha();
  std::optional<FredholmBasis<double>> fredholm;
  std::optional<Vector<double>> rhs;
  RegConfig<double> config;
  std::optional<Vector<double>> exact_solution;
  std::optional<DiscreteOperator<double>> exact_operator;

  std::size_t size() const { return op.size(); }

  /// Exact operator for the error analysis: exact_matrix when given, else the operator itself.
  const DiscreteOperator<double>& reference_operator() const { return exact_operator ? *exact_operator : op; }
};

/// Parses "sqrt", "power:p" or "fixed:alpha".
inline CoordinationRule parse_rule(const std::string& text) {
  try {
    if (text == "sqrt") return CoordinationRule::sqrt_delta();
    if (text.rfind("power:", 0) == 0) return CoordinationRule::power_delta(std::stod(text.substr(6)));
    if (text.rfind("fixed:", 0) == 0) return CoordinationRule::fixed(std::stod(text.substr(6)));
  } catch (const std::exception&) {
    throw ProblemError("invalid coordination rule '" + text + "'");
  }
  throw ProblemError("unknown coordination rule '" + text + "'");
}

namespace detail {

using nlohmann::json;

inline double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ProblemError(what + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ProblemError(what + " must be finite");
  return v;
}

inline Vector<double> vector(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ProblemError(what + " must be a nonempty array of numbers");
  Vector<double> v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], what);
  return v;
}

inline std::vector<Vector<double>> vectors(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ProblemError(what + " must be a nonempty array of vectors");
  std::vector<Vector<double>> out;
  for (const auto& v : j) out.push_back(vector(v, what));
  return out;
}

inline Matrix<double> matrix(const json& j, const std::string& what) {
  const auto rows = vectors(j, what);
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix<double> m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (rows[static_cast<std::size_t>(i)].size() != n) throw ProblemError(what + " must be square");
    m.row(i) = rows[static_cast<std::size_t>(i)].transpose();
  }
  return m;
}

inline void require_size(const Vector<double>& v, std::size_t n, const std::string& what) {
  if (static_cast<std::size_t>(v.size()) != n) throw ProblemError(what + " length differs from the operator size");
}

}  // namespace detail

/// Validates and converts a problem document. See docs/problem-file.md for the schema.
inline Problem parse_problem(const nlohmann::json& doc) {
  using detail::json;
  if (!doc.is_object()) throw ProblemError("problem file must be a JSON object");
  Problem p;

  const bool has_matrix = doc.contains("matrix");
  const bool has_operator = doc.contains("operator");
  if (has_matrix == has_operator) throw ProblemError("exactly one of 'matrix' or 'operator' is required");
  if (has_matrix) {
    p.op = DiscreteOperator<double>::dense(detail::matrix(doc["matrix"], "matrix"));
  } else {
    if (doc["operator"] != "volterra") throw ProblemError("'operator' must be \"volterra\"");
    const auto interval = detail::vector(doc.value("interval", json::array({0.0, 1.0})), "interval");
    if (interval.size() != 2 || !(interval(1) > interval(0))) throw ProblemError("interval must be [a, b] with a < b");
    if (!doc.contains("n") || !doc["n"].is_number_integer() || doc["n"].get<long long>() < 2)
      throw ProblemError("volterra operator needs integer n >= 2");
    p.op = DiscreteOperator<double>::volterra(interval(0), interval(1), doc["n"].get<std::size_t>());
  }
  const std::size_t n = p.op.size();

  std::optional<double> stabilizer_alpha;
  const json stab = doc.value("stabilizer", json{{"scalar_alpha", json::object()}});
  if (!stab.is_object() || stab.size() != 1) throw ProblemError("stabilizer must have exactly one key");
  if (stab.contains("scalar_alpha")) {
    if (stab["scalar_alpha"].is_number()) stabilizer_alpha = detail::number(stab["scalar_alpha"], "scalar_alpha");
  } else if (stab.contains("finite_dim")) {
    const auto& fd = stab["finite_dim"];
    if (!fd.is_object() || !fd.contains("phis") || !fd.contains("psis"))
      throw ProblemError("finite_dim needs 'phis' and 'psis'");
    auto phis = detail::vectors(fd["phis"], "phis");
    auto psis = detail::vectors(fd["psis"], "psis");
    std::optional<std::vector<Vector<double>>> gammas, zs;
    if (fd.contains("gammas")) gammas = detail::vectors(fd["gammas"], "gammas");
    if (fd.contains("zs")) zs = detail::vectors(fd["zs"], "zs");
    for (const auto* family : {&phis, &psis})
      for (const auto& v : *family) detail::require_size(v, n, "basis vector");
    try {
      auto built = build_stabilizer(std::move(phis), std::move(psis), std::move(gammas), std::move(zs));
      p.fredholm = std::move(built.basis);
      p.stabilizer = std::move(built.stabilizer);
    } catch (const Error& e) {
      throw ProblemError(std::string("finite_dim basis rejected: ") + e.what());
    }
  } else {
    throw ProblemError("stabilizer must be 'scalar_alpha' or 'finite_dim'");
  }

  if (doc.contains("rhs")) {
    p.rhs = detail::vector(doc["rhs"], "rhs");
    detail::require_size(*p.rhs, n, "rhs");
  }
  p.config.delta = doc.contains("delta") ? detail::number(doc["delta"], "delta") : 0.0;
  if (p.config.delta < 0) throw ProblemError("delta must be non-negative");
  if (doc.contains("q_max")) {
    p.config.q_max = detail::number(doc["q_max"], "q_max");
    if (!(p.config.q_max > 0 && p.config.q_max < 1)) throw ProblemError("q_max must lie in (0, 1)");
  }
  if (doc.contains("alpha")) {
    p.config.alpha = detail::number(doc["alpha"], "alpha");
  } else if (stabilizer_alpha) {
    p.config.alpha = stabilizer_alpha;
  }
  if (doc.contains("rule")) {
    if (!doc["rule"].is_string()) throw ProblemError("rule must be a string");
    p.config.rule = parse_rule(doc["rule"].get<std::string>());
  }
  if (p.config.alpha && !(*p.config.alpha > 0)) throw ProblemError("alpha must be positive");
  if (!p.fredholm && !p.config.alpha && !p.config.rule) throw ProblemError("one of 'alpha' or 'rule' is required");
  if (!p.config.alpha && p.config.rule && p.config.rule->kind != CoordinationRule::Kind::fixed && !(p.config.delta > 0))
    throw ProblemError("a delta-based rule needs delta > 0");

  if (doc.contains("exact_solution")) {
    p.exact_solution = detail::vector(doc["exact_solution"], "exact_solution");
    detail::require_size(*p.exact_solution, n, "exact_solution");
  }
  if (doc.contains("exact_matrix")) {
    auto m = detail::matrix(doc["exact_matrix"], "exact_matrix");
    if (static_cast<std::size_t>(m.rows()) != n) throw ProblemError("exact_matrix size differs from the operator");
    p.exact_operator = DiscreteOperator<double>::dense(std::move(m));
  }
  return p;
}

inline Problem read_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ProblemError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ProblemError(std::string("invalid JSON: ") + e.what());
  }
  return parse_problem(doc);
}

inline nlohmann::json to_json(const Vector<double>& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

/// JSON mirror of a solve report.
inline nlohmann::json to_json(const SolveReport<double>& r, double alpha, double delta) {
  nlohmann::json j;
  j["alpha"] = alpha;
  j["delta"] = delta;
  j["solution"] = to_json(r.solution);
  j["residual_norm"] = r.residual_norm;
  j["c_alpha_est"] = r.c_alpha_est;
  j["q_est"] = r.q_est;
  j["q_exceeded"] = r.q_exceeded;
  if (r.observed_error) j["observed_error"] = *r.observed_error;
  if (r.c_exact) j["c_exact"] = *r.c_exact;
  if (r.gap) j["gap"] = *r.gap;
  if (r.bound) j["bound"] = *r.bound;
  if (r.bound_components)
    j["bound_components"] = {{"gap", r.bound_components->gap},
                             {"amplification", r.bound_components->amplification},
                             {"x_star_norm", r.bound_components->x_star_norm}};
  if (!r.selection_functionals.empty()) j["selection_functionals"] = r.selection_functionals;
  return j;
}

}  // namespace perturbreg::io
