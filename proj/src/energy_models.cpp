#include "hisd/energy_models.hpp"

#include <cmath>

#include "hisd/errors.hpp"

namespace hisd {

namespace {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw EvaluationError(std::string(what) + " returned a non-finite value");
}

}  // namespace

EnergyModel make_double_well() {
  EnergyModel model;
  model.name = "double_well";
  model.dim = 2;
  model.energy = [](const Vector& p) {
    const double s = p(0) * p(0) - 1.0;
    return -0.25 * s * s - 0.5 * p(1) * p(1);
  };
  model.neg_gradient = [](const Vector& p) {
    Vector f(2);
    f << p(0) * p(0) * p(0) - p(0), p(1);
    return f;
  };
  // J = diag(3x^2 - 1, 1)
  model.neg_hessian_apply = [](const Vector& p, const Vector& v) {
    Vector jv(2);
    jv << (3.0 * p(0) * p(0) - 1.0) * v(0), v(1);
    return jv;
  };
  return model;
}

EnergyModel make_quadratic(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw ConfigError("quadratic model needs a non-empty square matrix", "matrix");
  }
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + a.cwiseAbs().maxCoeff())) {
    throw ConfigError("quadratic model matrix must be symmetric", "matrix");
  }
  const Vector lin = b.size() == 0 ? Vector::Zero(a.rows()) : b;
  if (lin.size() != a.rows()) throw ConfigError("linear term has the wrong length", "linear");

  EnergyModel model;
  model.name = "quadratic";
  model.dim = static_cast<int>(a.rows());
  model.energy = [a, lin](const Vector& x) { return 0.5 * x.dot(a * x) + lin.dot(x); };
  model.neg_gradient = [a, lin](const Vector& x) -> Vector { return -(a * x + lin); };
  model.neg_hessian_apply = [a](const Vector&, const Vector& v) -> Vector { return -(a * v); };
  return model;
}

Vector dimer_hv(const EnergyModel& model, const Vector& x, const Vector& v,
                const DimerParams& params) {
  const double l = params.half_length;
  if (!(l > 0.0)) throw EvaluationError("dimer half length must be positive");
  if (!(v.norm() > 0.0)) throw EvaluationError("dimer direction must be non-zero");
  const Vector f_plus = model.neg_gradient(x + l * v);
  const Vector f_minus = model.neg_gradient(x - l * v);
  require_finite(f_plus, "gradient");
  require_finite(f_minus, "gradient");
  return (f_plus - f_minus) / (2.0 * l);
}

EnergyModel with_dimer_hessian(EnergyModel model, DimerParams params) {
  // The lambda keeps its own copy of the analytic pieces it needs.
  EnergyModel base = model;
  model.neg_hessian_apply = [base, params](const Vector& x, const Vector& v) {
    return dimer_hv(base, x, v, params);
  };
  return model;
}

CheckReport finite_difference_check(const EnergyModel& model, const Vector& x, double h) {
  if (!(h > 0.0)) throw EvaluationError("finite-difference step must be positive");
  const int d = model.dim;
  CheckReport report;

  const Vector f = model.neg_gradient(x);
  for (int i = 0; i < d; ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    const double dedx = (model.energy(xp) - model.energy(xm)) / (2.0 * h);
    report.gradient_discrepancy = std::max(report.gradient_discrepancy, std::abs(dedx + f(i)));
  }

  std::vector<Vector> probes;
  for (int i = 0; i < d; ++i) probes.push_back(Vector::Unit(d, i));
  probes.push_back(Vector::Ones(d) / std::sqrt(static_cast<double>(d)));
  for (const Vector& v : probes) {
    const Vector fd = (model.neg_gradient(x + h * v) - model.neg_gradient(x - h * v)) / (2.0 * h);
    const Vector jv = model.neg_hessian_apply(x, v);
    report.hessian_discrepancy =
        std::max(report.hessian_discrepancy, (fd - jv).cwiseAbs().maxCoeff());
  }
  return report;
}

ModelRegistry ModelRegistry::with_builtins() {
  ModelRegistry registry;
  registry.add("double_well", [](const nlohmann::json&) { return make_double_well(); });
  registry.add("quadratic", [](const nlohmann::json& params) {
    if (!params.contains("matrix") || !params["matrix"].is_array()) {
      throw ConfigError("quadratic model requires \"matrix\" (list of rows)", "model.matrix");
    }
    const auto& rows = params["matrix"];
    const auto n = static_cast<Eigen::Index>(rows.size());
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!rows[i].is_array() || static_cast<Eigen::Index>(rows[i].size()) != n) {
        throw ConfigError("quadratic model matrix must be square", "model.matrix");
      }
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rows[i][j].get<double>();
    }
    Vector b;
    if (params.contains("linear")) {
      const auto values = params["linear"].get<std::vector<double>>();
      b = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    }
    return make_quadratic(a, b);
  });
  return registry;
}

void ModelRegistry::add(const std::string& name, Factory factory) {
  factories_[name] = std::move(factory);
}

bool ModelRegistry::contains(const std::string& name) const { return factories_.count(name) > 0; }

std::vector<std::string> ModelRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : factories_) out.push_back(name);
  return out;
}

EnergyModel ModelRegistry::make(const std::string& name, const nlohmann::json& params) const {
  const auto it = factories_.find(name);
  if (it == factories_.end()) throw ConfigError("unknown model \"" + name + "\"", "model.name");
  try {
    return it->second(params);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad model parameters: ") + e.what(), "model");
  }
}

}  // namespace hisd
