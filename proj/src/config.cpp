#include "hisd/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "hisd/errors.hpp"

namespace hisd {

namespace {

using nlohmann::json;

constexpr double kAdjustWarn = 1e-8;

template <typename T>
T get_or(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field \"") + key + "\" has the wrong type", key);
  }
}

Vector read_vector(const json& node, const std::string& field) {
  if (!node.is_array() || node.empty()) throw ConfigError(field + " must be a non-empty list", field);
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number()) throw ConfigError(field + " must contain numbers", field);
    v(static_cast<Eigen::Index>(i)) = node[i].get<double>();
  }
  return v;
}

Mode parse_mode(const std::string& text) {
  if (text == "run") return Mode::Run;
  if (text == "converge") return Mode::Converge;
  if (text == "compare") return Mode::Compare;
  if (text == "residual") return Mode::Residual;
  if (text == "check") return Mode::Check;
  throw ConfigError("unknown mode \"" + text + "\"", "mode");
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  cfg.mode = parse_mode(get_or<std::string>(doc, "mode", "run"));

  if (doc.contains("model")) {
    const json& m = doc["model"];
    if (m.is_string()) {
      cfg.model_name = m.get<std::string>();
    } else if (m.is_object() && m.contains("name") && m["name"].is_string()) {
      cfg.model_name = m["name"].get<std::string>();
      cfg.model_params = m;
    } else {
      throw ConfigError("model must be a name or an object with \"name\"", "model");
    }
  }

  SchemeConfig& s = cfg.scheme;
  s.scheme = parse_scheme(get_or<std::string>(doc, "scheme", "gs"));
  s.beta = get_or(doc, "beta", 1.0);
  s.gamma = get_or(doc, "gamma", 1.0);
  s.index_k = get_or(doc, "k", 1);
  s.horizon = get_or(doc, "T", 7.0);
  s.retraction = parse_retraction(get_or<std::string>(doc, "retraction", "gram_schmidt"));
  const auto hessian = get_or<std::string>(doc, "hessian", "analytic");
  if (hessian == "analytic") {
    s.hessian_mode = HessianMode::Analytic;
  } else if (hessian == "dimer") {
    s.hessian_mode = HessianMode::Dimer;
  } else {
    throw ConfigError("hessian must be \"analytic\" or \"dimer\"", "hessian");
  }
  s.dimer.half_length = get_or(doc, "dimer_length", 1e-3);
  s.gs_tol = get_or(doc, "gs_tol", kGramSchmidtTol);
  s.early_stop_force = get_or(doc, "early_stop", 0.0);

  if (doc.contains("tau")) {
    const json& t = doc["tau"];
    if (t.is_number()) {
      cfg.taus = {t.get<double>()};
    } else if (t.is_array() && !t.empty()) {
      for (const json& e : t) {
        if (!e.is_number()) throw ConfigError("tau list must contain numbers", "tau");
        cfg.taus.push_back(e.get<double>());
      }
    } else {
      throw ConfigError("tau must be a number or a non-empty list", "tau");
    }
  } else {
    cfg.taus = {0.01};
  }
  for (double tau : cfg.taus) {
    if (!(tau > 0.0)) throw ConfigError("tau values must be positive", "tau");
  }
  s.tau = cfg.taus.front();

  cfg.ref_tau = get_or(doc, "ref_tau", kDefaultReferenceTau);
  cfg.output_dir = get_or<std::string>(doc, "output_dir", ".");
  cfg.orthonormalize_v0 = get_or(doc, "orthonormalize_v0", true);
  cfg.compare_with = parse_scheme(get_or<std::string>(doc, "compare_with", "lm"));

  if (doc.contains("x0")) cfg.x0 = read_vector(doc["x0"], "x0");
  if (doc.contains("v0")) {
    const json& v = doc["v0"];
    if (!v.is_array() || v.empty()) throw ConfigError("v0 must be a list of vectors", "v0");
    std::vector<Vector> cols;
    for (const json& col : v) cols.push_back(read_vector(col, "v0"));
    cfg.v0.resize(cols.front().size(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i].size() != cols.front().size()) {
        throw ConfigError("v0 vectors must share one length", "v0");
      }
      cfg.v0.col(static_cast<Eigen::Index>(i)) = cols[i];
    }
  }

  if (doc.contains("check")) {
    const json& c = doc["check"];
    cfg.check.points = get_or(c, "points", cfg.check.points);
    cfg.check.box = get_or(c, "box", cfg.check.box);
    cfg.check.fd_step = get_or(c, "fd_step", cfg.check.fd_step);
    cfg.check.seed = get_or(c, "seed", cfg.check.seed);
    if (cfg.check.points < 1) throw ConfigError("check.points must be positive", "check.points");
    if (!(cfg.check.fd_step > 0.0)) {
      throw ConfigError("check.fd_step must be positive", "check.fd_step");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string(), "config");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what(), "config");
  }
  return parse_config(doc);
}

PreparedExperiment prepare(const ExperimentConfig& cfg, const ModelRegistry& registry) {
  PreparedExperiment out;
  out.model = registry.make(cfg.model_name, cfg.model_params);
  const int d = out.model.dim;
  cfg.scheme.validate(d);

  if (cfg.mode == Mode::Check) {
    // Checks sample their own points; x0/v0 are optional.
    out.init = make_state(cfg.x0.size() == d ? cfg.x0 : Vector(Vector::Zero(d)), Matrix(d, 0));
    return out;
  }
  if (cfg.x0.size() != d) {
    throw ConfigError("x0 must have " + std::to_string(d) + " entries", "x0");
  }
  if (cfg.v0.cols() != cfg.scheme.index_k) {
    throw ConfigError("v0 must hold exactly k = " + std::to_string(cfg.scheme.index_k) +
                          " vectors",
                      "v0");
  }
  if (cfg.v0.rows() != d) {
    throw ConfigError("v0 vectors must have " + std::to_string(d) + " entries", "v0");
  }

  Vector x = cfg.x0;
  Matrix v = cfg.v0;
  if (cfg.scheme.scheme == Scheme::ConstrainedSphere) {
    try {
      x = sphere_retract(cfg.x0);
    } catch (const DegenerateDirectionError&) {
      throw ConfigError("x0 must be non-zero for the constrained scheme", "x0");
    }
    if ((x - cfg.x0).norm() > kAdjustWarn) {
      out.warnings.push_back("x0 normalized onto the unit sphere");
    }
    const Matrix before = v;
    for (Eigen::Index i = 0; i < v.cols(); ++i) v.col(i) = tangent_project(v.col(i), x);
    if ((v - before).cwiseAbs().maxCoeff() > kAdjustWarn) {
      out.warnings.push_back("v0 projected onto the tangent space at x0");
    }
  }
  if (cfg.orthonormalize_v0 || cfg.scheme.scheme == Scheme::ConstrainedSphere) {
    Frame frame;
    try {
      frame = orthonormalize_frame(v, cfg.scheme.gs_tol);
    } catch (const DegenerateDirectionError& e) {
      throw ConfigError(std::string("v0 is degenerate: ") + e.what(), "v0");
    }
    if ((frame.matrix() - cfg.v0).cwiseAbs().maxCoeff() > kAdjustWarn) {
      out.warnings.push_back("v0 orthonormalized (adjustment exceeds 1e-8)");
    }
    v = frame.matrix();
  } else if (Frame(v).orthonormality_defect() > kAdjustWarn) {
    out.warnings.push_back(
        "v0 is not orthonormal and is used as given; the first step orthonormalizes it");
  }
  out.init = make_state(std::move(x), std::move(v));
  return out;
}

}  // namespace hisd
