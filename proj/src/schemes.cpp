#include "hisd/schemes.hpp"

#include <cmath>
#include <string>

#include "hisd/errors.hpp"

namespace hisd {

namespace {

constexpr double kDivergenceNorm = 1e8;

// (I - 2 V V^T) F
Vector reflect(const Matrix& v, const Vector& f) { return f - 2.0 * v * (v.transpose() * f); }

// J(x) v_i for every column.
Matrix hessian_columns(const EnergyModel& model, const SchemeConfig& cfg, const Vector& x,
                       const Matrix& v) {
  Matrix jv(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.cols(); ++i) jv.col(i) = apply_hessian(model, cfg, x, v.col(i));
  return jv;
}

// L_i = gamma (-v_i v_i^T - 2 sum_{j<i} v_j v_j^T) J v_i, given JV.
Matrix lagrange_terms(const Matrix& v, const Matrix& jv, double gamma) {
  Matrix l(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    Vector li = -v.col(i).dot(jv.col(i)) * v.col(i);
    for (Eigen::Index j = 0; j < i; ++j) li -= 2.0 * v.col(j).dot(jv.col(i)) * v.col(j);
    l.col(i) = gamma * li;
  }
  return l;
}

Frame retract(const Matrix& predictor, const SchemeConfig& cfg) {
  if (cfg.retraction == Retraction::SvdProjection) {
    return svd_projection_retract(predictor, cfg.gs_tol);
  }
  return orthonormalize_frame(predictor, cfg.gs_tol);
}

void check_finite(const SaddleState& s) {
  if (!s.x.allFinite() || !s.frame.matrix().allFinite()) {
    throw DivergenceError("state became non-finite at step " + std::to_string(s.step));
  }
}

SaddleState advance(const SaddleState& state, Vector x, Frame frame, const SchemeConfig& cfg) {
  SaddleState next{std::move(x), std::move(frame), state.step + 1, 0.0};
  next.time = static_cast<double>(next.step) * cfg.tau;
  check_finite(next);
  return next;
}

SaddleState step_unconstrained(const SaddleState& state, const EnergyModel& model,
                               const SchemeConfig& cfg, bool with_lagrange) {
  const Matrix& v = state.frame.matrix();
  const Vector f = model.neg_gradient(state.x);
  Vector x = state.x + cfg.tau * cfg.beta * reflect(v, f);

  const Matrix jv = hessian_columns(model, cfg, state.x, v);
  Matrix predictor = v + cfg.tau * cfg.gamma * jv;
  if (with_lagrange) predictor += cfg.tau * lagrange_terms(v, jv, cfg.gamma);

  return advance(state, std::move(x), retract(predictor, cfg), cfg);
}

}  // namespace

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::UnconstrainedGS: return "gs";
    case Scheme::UnconstrainedLM: return "lm";
    case Scheme::ConstrainedSphere: return "constrained";
  }
  return "?";
}

std::string_view to_string(Retraction retraction) {
  return retraction == Retraction::GramSchmidt ? "gram_schmidt" : "svd";
}

Scheme parse_scheme(std::string_view text) {
  if (text == "gs" || text == "UnconstrainedGS") return Scheme::UnconstrainedGS;
  if (text == "lm" || text == "UnconstrainedLM") return Scheme::UnconstrainedLM;
  if (text == "constrained" || text == "ConstrainedSphere") return Scheme::ConstrainedSphere;
  throw ConfigError("unknown scheme \"" + std::string(text) + "\"", "scheme");
}

Retraction parse_retraction(std::string_view text) {
  if (text == "gram_schmidt" || text == "gs") return Retraction::GramSchmidt;
  if (text == "svd" || text == "svd_projection") return Retraction::SvdProjection;
  throw ConfigError("unknown retraction \"" + std::string(text) + "\"", "retraction");
}

long SchemeConfig::steps() const { return std::lround(horizon / tau); }

void SchemeConfig::validate(int dim) const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be positive", "tau");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("T must be positive", "T");
  if (tau > horizon) throw ConfigError("tau must not exceed T", "tau");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive", "beta");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive", "gamma");
  if (index_k < 1) throw ConfigError("k must be at least 1", "k");
  if (index_k > dim) {
    throw ConfigError("k = " + std::to_string(index_k) + " exceeds the dimension " +
                          std::to_string(dim),
                      "k");
  }
  if (scheme == Scheme::ConstrainedSphere) {
    if (beta != 1.0 || gamma != 1.0) {
      throw ConfigError("the constrained scheme is defined for beta = gamma = 1", "beta");
    }
    if (index_k > dim - 1) {
      throw ConfigError("k must be below the dimension for the constrained scheme", "k");
    }
  }
  if (hessian_mode == HessianMode::Dimer && !(dimer.half_length > 0.0)) {
    throw ConfigError("dimer half length must be positive", "dimer_length");
  }
  if (!(gs_tol > 0.0)) throw ConfigError("gs_tol must be positive", "gs_tol");
  if (early_stop_force < 0.0) throw ConfigError("early_stop must be non-negative", "early_stop");
}

Vector apply_hessian(const EnergyModel& model, const SchemeConfig& cfg, const Vector& x,
                     const Vector& v) {
  if (cfg.hessian_mode == HessianMode::Dimer) return dimer_hv(model, x, v, cfg.dimer);
  return model.neg_hessian_apply(x, v);
}

SaddleState step_unconstrained_gs(const SaddleState& state, const EnergyModel& model,
                                  const SchemeConfig& cfg) {
  return step_unconstrained(state, model, cfg, false);
}

SaddleState step_unconstrained_lm(const SaddleState& state, const EnergyModel& model,
                                  const SchemeConfig& cfg) {
  return step_unconstrained(state, model, cfg, true);
}

SaddleState step_constrained(const SaddleState& state, const EnergyModel& model,
                             const SchemeConfig& cfg) {
  const Matrix& v = state.frame.matrix();
  const Vector f = model.neg_gradient(state.x);
  const Vector x = sphere_retract(state.x + cfg.tau * reflect(v, f));

  Matrix predictor = v + cfg.tau * hessian_columns(model, cfg, state.x, v);
  // Transport onto the tangent space at the new point.
  for (Eigen::Index i = 0; i < predictor.cols(); ++i) {
    predictor.col(i) = tangent_project(predictor.col(i), x);
  }
  return advance(state, x, retract(predictor, cfg), cfg);
}

SaddleState step(const SaddleState& state, const EnergyModel& model, const SchemeConfig& cfg) {
  switch (cfg.scheme) {
    case Scheme::UnconstrainedGS: return step_unconstrained_gs(state, model, cfg);
    case Scheme::UnconstrainedLM: return step_unconstrained_lm(state, model, cfg);
    case Scheme::ConstrainedSphere: return step_constrained(state, model, cfg);
  }
  throw ConfigError("unknown scheme", "scheme");
}

Rhs recovered_rhs(const SaddleState& state, const EnergyModel& model, const SchemeConfig& cfg) {
  const Matrix& v = state.frame.matrix();
  const Vector f = model.neg_gradient(state.x);
  const Matrix jv = hessian_columns(model, cfg, state.x, v);
  return {cfg.beta * reflect(v, f), cfg.gamma * jv + lagrange_terms(v, jv, cfg.gamma)};
}

Rhs constrained_rhs(const SaddleState& state, const EnergyModel& model, const SchemeConfig& cfg) {
  SchemeConfig unit = cfg;
  unit.beta = 1.0;
  unit.gamma = 1.0;
  Rhs rhs = recovered_rhs(state, model, unit);

  const Vector& x = state.x;
  const Matrix& v = state.frame.matrix();
  const Vector f = model.neg_gradient(x);
  rhs.dx -= x.dot(f) * x;
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    const Vector jvi = apply_hessian(model, unit, x, v.col(i));
    rhs.dv.col(i) += (v.col(i).dot(f) - x.dot(jvi)) * x;
  }
  return rhs;
}

Rhs continuous_rhs(const SaddleState& state, const EnergyModel& model, const SchemeConfig& cfg) {
  return cfg.scheme == Scheme::ConstrainedSphere ? constrained_rhs(state, model, cfg)
                                                 : recovered_rhs(state, model, cfg);
}

SaddleState make_state(Vector x0, Matrix v0) {
  return SaddleState{std::move(x0), Frame(std::move(v0)), 0, 0.0};
}

Trajectory run(const EnergyModel& model, const SaddleState& init, const SchemeConfig& cfg,
               long record_stride) {
  cfg.validate(model.dim);
  if (init.x.size() != model.dim) throw ConfigError("x0 has the wrong length", "x0");
  if (init.frame.count() != cfg.index_k || init.frame.dim() != model.dim) {
    throw ConfigError("v0 must hold k vectors of the model dimension", "v0");
  }
  if (cfg.scheme == Scheme::ConstrainedSphere) {
    const Vector& x = init.x;
    if (std::abs(x.norm() - 1.0) > 1e-12 ||
        (init.frame.count() > 0 &&
         (init.frame.matrix().transpose() * x).cwiseAbs().maxCoeff() > 1e-12) ||
        init.frame.orthonormality_defect() > 1e-12) {
      throw ConfigError("constrained scheme needs a unit x0 and an orthonormal tangent frame",
                        "x0");
    }
  }
  const long n_steps = cfg.steps();
  if (record_stride < 1 || n_steps % record_stride != 0) {
    throw ConfigError("record stride must divide the step count", "tau");
  }

  Trajectory traj;
  traj.config = cfg;
  traj.model_name = model.name;
  traj.stride = record_stride;
  traj.states.reserve(static_cast<std::size_t>(n_steps / record_stride + 1));

  SaddleState state = init;
  state.step = 0;
  state.time = 0.0;
  traj.states.push_back(state);
  for (long n = 1; n <= n_steps; ++n) {
    state = step(state, model, cfg);
    if (state.x.norm() > kDivergenceNorm) {
      throw DivergenceError("|x| exceeded 1e8 at step " + std::to_string(n));
    }
    const bool stop = cfg.early_stop_force > 0.0 &&
                      model.neg_gradient(state.x).norm() < cfg.early_stop_force;
    if (n % record_stride == 0 || stop) traj.states.push_back(state);
    if (stop) break;
  }
  return traj;
}

double ResidualSeries::max_x() const {
  double m = 0.0;
  for (double r : x_residual) m = std::max(m, r);
  return m;
}

double ResidualSeries::max_v() const {
  return v_residual.size() == 0 ? 0.0 : v_residual.maxCoeff();
}

ResidualSeries residual_vs_recovered(const Trajectory& traj, const EnergyModel& model) {
  if (traj.stride != 1) throw ConfigError("residuals need every step recorded", "stride");
  const SchemeConfig& cfg = traj.config;
  const auto n = traj.states.empty() ? 0 : traj.states.size() - 1;
  ResidualSeries out;
  out.x_residual.resize(n);
  out.v_residual.resize(static_cast<Eigen::Index>(n), cfg.index_k);
  for (std::size_t m = 0; m < n; ++m) {
    const SaddleState& prev = traj.states[m];
    const SaddleState& next = traj.states[m + 1];
    const double tau = cfg.tau;
    const Rhs rhs = continuous_rhs(prev, model, cfg);
    out.x_residual[m] = ((next.x - prev.x) / tau - rhs.dx).norm();
    const Matrix dv = (next.frame.matrix() - prev.frame.matrix()) / tau - rhs.dv;
    out.v_residual.row(static_cast<Eigen::Index>(m)) = dv.colwise().norm();
  }
  return out;
}

}  // namespace hisd
