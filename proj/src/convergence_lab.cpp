#include "hisd/convergence_lab.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <string>

#include "hisd/errors.hpp"

namespace hisd {

namespace {

// Integer m with numerator == m * denominator up to a relative 1e-9, or -1.
long integer_ratio(double numerator, double denominator) {
  const double r = numerator / denominator;
  const long m = std::lround(r);
  if (m < 1 || std::abs(r - static_cast<double>(m)) > 1e-9 * std::max(1.0, r)) return -1;
  return m;
}

double rate(double coarse, double fine) {
  if (!(coarse > 0.0) || !(fine > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(coarse / fine);
}

void check_decreasing(const std::vector<double>& taus) {
  if (taus.empty()) throw ConfigError("at least one tau is required", "tau");
  for (std::size_t m = 0; m < taus.size(); ++m) {
    if (!(taus[m] > 0.0)) throw ConfigError("tau values must be positive", "tau");
    if (m > 0 && !(taus[m] < taus[m - 1])) {
      throw ConfigError("tau values must be strictly decreasing", "tau");
    }
  }
}

ConvergenceReport tabulate(const std::vector<double>& taus, std::vector<ErrorSummary> errors,
                           int k, double reference_tau, Scheme scheme) {
  ConvergenceReport report;
  report.taus = taus;
  report.reference_tau = reference_tau;
  report.scheme = scheme;
  report.errors_v.assign(static_cast<std::size_t>(k), {});
  report.rates_v.assign(static_cast<std::size_t>(k), {});
  for (std::size_t m = 0; m < errors.size(); ++m) {
    report.errors_x.push_back(errors[m].x);
    for (int i = 0; i < k; ++i) report.errors_v[i].push_back(errors[m].v[i]);
    if (m == 0) continue;
    report.rates_x.push_back(rate(errors[m - 1].x, errors[m].x));
    for (int i = 0; i < k; ++i) report.rates_v[i].push_back(rate(errors[m - 1].v[i], errors[m].v[i]));
  }
  return report;
}

template <typename Fn>
std::vector<ErrorSummary> sweep(const std::vector<double>& taus, Fn&& measure) {
  std::vector<std::future<ErrorSummary>> pending;
  pending.reserve(taus.size());
  for (double tau : taus) pending.push_back(std::async(std::launch::async, measure, tau));
  std::vector<ErrorSummary> out;
  for (auto& f : pending) out.push_back(f.get());
  return out;
}

}  // namespace

Trajectory reference_solution(const EnergyModel& model, const SaddleState& init,
                              const SchemeConfig& cfg, double ref_tau, double sample_tau) {
  SchemeConfig ref_cfg = cfg;
  if (ref_cfg.scheme != Scheme::ConstrainedSphere) ref_cfg.scheme = Scheme::UnconstrainedGS;
  ref_cfg.tau = ref_tau;
  ref_cfg.early_stop_force = 0.0;
  const long stride = integer_ratio(sample_tau, ref_tau);
  if (stride < 1) {
    throw ConfigError("sample step must be an integer multiple of ref_tau", "ref_tau");
  }
  return run(model, init, ref_cfg, stride);
}

ErrorSummary max_error(const Trajectory& traj, const Trajectory& ref) {
  if (traj.states.empty() || ref.states.empty()) throw ConfigError("empty trajectory", "tau");
  if (traj.config.index_k != ref.config.index_k ||
      traj.states.front().x.size() != ref.states.front().x.size()) {
    throw ConfigError("trajectories have different shapes", "k");
  }
  // Shared grid: every step of the coarser recording.
  const double dt = traj.sample_tau();
  const double dr = ref.sample_tau();
  long traj_stride = 1, ref_stride = 1;
  if (dt >= dr) {
    ref_stride = integer_ratio(dt, dr);
  } else {
    traj_stride = integer_ratio(dr, dt);
  }
  if (ref_stride < 1 || traj_stride < 1) {
    throw ConfigError("trajectory grids are not commensurate", "tau");
  }

  ErrorSummary out;
  out.v.assign(static_cast<std::size_t>(traj.config.index_k), 0.0);
  for (std::size_t a = 0, b = 0; a < traj.states.size() && b < ref.states.size();
       a += static_cast<std::size_t>(traj_stride), b += static_cast<std::size_t>(ref_stride)) {
    const SaddleState& s = traj.states[a];
    const SaddleState& r = ref.states[b];
    out.x = std::max(out.x, (s.x - r.x).norm());
    for (int i = 0; i < traj.config.index_k; ++i) {
      out.v[i] = std::max(out.v[i], (s.frame.vector(i) - r.frame.vector(i)).norm());
    }
  }
  return out;
}

ErrorSummary max_error(const Trajectory& traj, const ExactSolution& exact) {
  ErrorSummary out;
  out.v.assign(static_cast<std::size_t>(traj.config.index_k), 0.0);
  for (const SaddleState& s : traj.states) {
    const auto [x, v] = exact(s.time);
    out.x = std::max(out.x, (s.x - x).norm());
    for (int i = 0; i < traj.config.index_k; ++i) {
      out.v[i] = std::max(out.v[i], (s.frame.vector(i) - v.col(i)).norm());
    }
  }
  return out;
}

ConvergenceReport convergence_table(const EnergyModel& model, const SaddleState& init,
                                    const SchemeConfig& cfg, const std::vector<double>& taus,
                                    double ref_tau) {
  check_decreasing(taus);
  if (!(ref_tau > 0.0) || !(taus.back() > ref_tau)) {
    throw ConfigError("the reference step must be finer than every tau", "ref_tau");
  }
  for (double tau : taus) {
    if (integer_ratio(tau, ref_tau) < 2) {
      throw ConfigError("every tau must be an integer multiple of ref_tau", "tau");
    }
  }
  const Trajectory ref = reference_solution(model, init, cfg, ref_tau, taus.back());
  auto errors = sweep(taus, [&](double tau) {
    SchemeConfig c = cfg;
    c.tau = tau;
    c.early_stop_force = 0.0;
    return max_error(run(model, init, c), ref);
  });
  return tabulate(taus, std::move(errors), cfg.index_k, ref_tau, cfg.scheme);
}

ConvergenceReport convergence_table(const EnergyModel& model, const SaddleState& init,
                                    const SchemeConfig& cfg, const std::vector<double>& taus,
                                    const ExactSolution& exact) {
  check_decreasing(taus);
  auto errors = sweep(taus, [&](double tau) {
    SchemeConfig c = cfg;
    c.tau = tau;
    c.early_stop_force = 0.0;
    return max_error(run(model, init, c), exact);
  });
  return tabulate(taus, std::move(errors), cfg.index_k, 0.0, cfg.scheme);
}

double DifferenceSeries::max_dx() const {
  double m = 0.0;
  for (double d : dx) m = std::max(m, d);
  return m;
}

double DifferenceSeries::max_dv1() const {
  double m = 0.0;
  for (double d : dv1) m = std::max(m, d);
  return m;
}

DifferenceSeries scheme_difference_series(const EnergyModel& model, const SaddleState& init,
                                          const SchemeConfig& cfg, double tau, Scheme other) {
  if (cfg.scheme == Scheme::ConstrainedSphere || other == Scheme::ConstrainedSphere) {
    throw ConfigError("scheme comparison is defined for the unconstrained schemes only",
                      "scheme");
  }
  SchemeConfig gs_cfg = cfg;
  gs_cfg.tau = tau;
  gs_cfg.scheme = Scheme::UnconstrainedGS;
  gs_cfg.early_stop_force = 0.0;
  SchemeConfig other_cfg = gs_cfg;
  other_cfg.scheme = other;
  gs_cfg.validate(model.dim);

  DifferenceSeries series;
  series.tau = tau;
  SaddleState a = init, b = init;
  a.step = b.step = 0;
  a.time = b.time = 0.0;
  const long n_steps = gs_cfg.steps();
  for (long n = 0;; ++n) {
    series.t.push_back(a.time);
    series.dx.push_back((a.x - b.x).norm());
    series.dv1.push_back((a.frame.vector(0) - b.frame.vector(0)).norm());
    if (n == n_steps) break;
    a = step(a, model, gs_cfg);
    b = step(b, model, other_cfg);
  }
  return series;
}

double log2_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log2(x[i]);
    const double ly = std::log2(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ResidualOrderReport residual_order_study(const EnergyModel& model, const SaddleState& init,
                                         const SchemeConfig& cfg, const std::vector<double>& taus) {
  check_decreasing(taus);
  std::vector<std::future<ResidualSeries>> pending;
  for (double tau : taus) {
    pending.push_back(std::async(std::launch::async, [&, tau] {
      SchemeConfig c = cfg;
      c.tau = tau;
      c.early_stop_force = 0.0;
      return residual_vs_recovered(run(model, init, c), model);
    }));
  }
  ResidualOrderReport report;
  report.taus = taus;
  for (auto& f : pending) {
    const ResidualSeries r = f.get();
    report.max_x_residual.push_back(r.max_x());
    report.max_v_residual.push_back(r.max_v());
  }
  auto fit = [&](const std::vector<double>& res) -> std::optional<double> {
    for (double r : res) {
      if (!(r > kResidualRoundoff)) return std::nullopt;
    }
    if (taus.size() < 2) return std::nullopt;
    return log2_slope(taus, res);
  };
  report.slope_x = fit(report.max_x_residual);
  report.slope_v = fit(report.max_v_residual);
  return report;
}

}  // namespace hisd
