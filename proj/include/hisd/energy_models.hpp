#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "hisd/types.hpp"

namespace hisd {

/// Evaluator bundle for an energy landscape.
///
/// The Hessian is only exposed through its action on vectors, so every
/// scheme runs unchanged with an analytic Hessian or with the dimer
/// approximation. Conventions: F(x) = -grad E(x), J(x) = -Hess E(x).
///
/// All callables must be re-entrant and free of side effects; a model may be
/// shared read-only between concurrently running trajectories.
struct EnergyModel {
  std::string name;
  int dim = 0;
  std::function<double(const Vector&)> energy;
  std::function<Vector(const Vector&)> neg_gradient;
  /// (x, v) -> J(x) v
  std::function<Vector(const Vector&, const Vector&)> neg_hessian_apply;
};

struct DimerParams {
  double half_length = 1e-3;
};

/// E(x, y) = -(x^2 - 1)^2 / 4 - y^2 / 2. (0,0) is an index-1 saddle and
/// (1,0) an index-2 saddle.
EnergyModel make_double_well();

/// E(x) = x^T A x / 2 + b^T x with symmetric A; b defaults to zero.
/// With A = 0 this is the linear energy b^T x.
EnergyModel make_quadratic(const Matrix& a, const Vector& b = Vector());

/// Symmetric-difference approximation of J(x) v:
/// (F(x + l v) - F(x - l v)) / (2 l). Exact on quadratics up to roundoff.
/// Throws EvaluationError for v = 0, l <= 0, or a non-finite gradient.
Vector dimer_hv(const EnergyModel& model, const Vector& x, const Vector& v,
                const DimerParams& params = {});

/// Copy of `model` whose Hessian action is replaced by dimer_hv.
EnergyModel with_dimer_hessian(EnergyModel model, DimerParams params = {});

struct CheckReport {
  /// max |central-difference dE/dx_i + F_i(x)|
  double gradient_discrepancy = 0.0;
  /// max over probes of |central-difference directional derivative of F - J v|
  double hessian_discrepancy = 0.0;
};

/// Compares F against central differences of E, and J v against central
/// differences of F along a fixed probe set (coordinate axes plus the
/// normalized all-ones direction). Throws EvaluationError for h <= 0.
CheckReport finite_difference_check(const EnergyModel& model, const Vector& x,
                                    double h = 1e-4);

/// Name -> factory lookup for models selectable from configuration files.
/// Built-ins: "double_well" (no parameters) and "quadratic"
/// (params: "matrix" as a list of rows, optional "linear" vector).
class ModelRegistry {
 public:
  using Factory = std::function<EnergyModel(const nlohmann::json& params)>;

  /// Registry preloaded with the built-in models.
  static ModelRegistry with_builtins();

  void add(const std::string& name, Factory factory);
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

  /// Throws ConfigError for unknown names or malformed parameters.
  EnergyModel make(const std::string& name,
                   const nlohmann::json& params = nlohmann::json::object()) const;

 private:
  std::map<std::string, Factory> factories_;
};

}  // namespace hisd
