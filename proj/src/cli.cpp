#include "hisd/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "hisd/csv.hpp"
#include "hisd/errors.hpp"
#include "hisd/svg.hpp"

namespace hisd::cli {

namespace {

std::filesystem::path output_dir(const ExperimentConfig& cfg, const Options& opts) {
  std::filesystem::path dir = opts.output ? *opts.output : cfg.output_dir;
  std::filesystem::create_directories(dir);
  return dir;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write " + path.string());
  return file;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string fmt_rate(double v) {
  if (std::isnan(v)) return "   -  ";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%6.3f", v);
  return buf;
}

std::string fmt_vec(const Vector& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v(i));
  }
  return s + ")";
}

PreparedExperiment prepare_and_warn(const ExperimentConfig& cfg, std::ostream& err) {
  PreparedExperiment exp = prepare(cfg);
  for (const auto& w : exp.warnings) err << "warning: " << w << '\n';
  return exp;
}

Vector random_point(std::mt19937_64& rng, int d, double box) {
  std::uniform_real_distribution<double> u(-box, box);
  Vector x(d);
  for (int i = 0; i < d; ++i) x(i) = u(rng);
  return x;
}

Vector random_unit(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = n(rng);
  return v / v.norm();
}

Matrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = n(rng);
  }
  return m;
}

CheckGroup group(std::string name, bool passed, std::string detail) {
  return {std::move(name), passed, std::move(detail)};
}

}  // namespace

int cmd_run(const ExperimentConfig& cfg, const Options& opts, std::ostream& out,
            std::ostream& err) {
  const PreparedExperiment exp = prepare_and_warn(cfg, err);
  const Trajectory traj = run(exp.model, exp.init, cfg.scheme);
  const auto dir = output_dir(cfg, opts);
  {
    auto file = open_output(dir / "trajectory.csv");
    csv::write_trajectory(file, traj);
  }
  const SaddleState& last = traj.states.back();
  out << "scheme " << to_string(cfg.scheme.scheme) << ", tau " << fmt(cfg.scheme.tau) << ", steps "
      << last.step << '\n';
  out << "final t = " << fmt(last.time) << '\n';
  out << "final x = " << fmt_vec(last.x) << '\n';
  for (int i = 0; i < last.frame.count(); ++i) {
    out << "final v" << i + 1 << " = " << fmt_vec(last.frame.vector(i)) << '\n';
  }
  out << "|F(x_N)| = " << fmt(exp.model.neg_gradient(last.x).norm()) << '\n';
  out << "wrote " << (dir / "trajectory.csv").string() << '\n';

  if (opts.svg) {
    svg::Series path{"x_n", {}, {}};
    const bool plane = exp.model.dim >= 2;
    for (const SaddleState& s : traj.states) {
      path.x.push_back(plane ? s.x(0) : s.time);
      path.y.push_back(plane ? s.x(1) : s.x(0));
    }
    auto file = open_output(dir / "trajectory.svg");
    svg::write_line_plot(file, "trajectory", plane ? "x1" : "t", plane ? "x2" : "x1", {path});
  }
  return exit_code::kSuccess;
}

int cmd_converge(const ExperimentConfig& cfg, const Options& opts, std::ostream& out,
                 std::ostream& err) {
  const PreparedExperiment exp = prepare_and_warn(cfg, err);
  for (double tau : cfg.taus) {
    if (!(tau > cfg.ref_tau)) {
      throw ConfigError("every tau must be larger than ref_tau", "tau");
    }
  }
  const ConvergenceReport report =
      convergence_table(exp.model, exp.init, cfg.scheme, cfg.taus, cfg.ref_tau);
  const auto dir = output_dir(cfg, opts);
  {
    auto file = open_output(dir / "convergence.csv");
    csv::write_convergence(file, report);
  }

  const std::size_t k = report.errors_v.size();
  out << "reference tau " << fmt(report.reference_tau) << " (scheme "
      << to_string(report.scheme == Scheme::ConstrainedSphere ? Scheme::ConstrainedSphere
                                                               : Scheme::UnconstrainedGS)
      << ")\n";
  out << "tau           err_x          CR    ";
  for (std::size_t i = 0; i < k; ++i) out << " err_v" << i + 1 << "         CR    ";
  out << '\n';
  bool rates_ok = true;
  auto check_rate = [&](double r) {
    if (!(r >= kStrictRateLow && r <= kStrictRateHigh)) rates_ok = false;
  };
  for (std::size_t m = 0; m < report.taus.size(); ++m) {
    const double rx = m ? report.rates_x[m - 1] : std::nan("");
    out << fmt(report.taus[m]) << "  " << fmt(report.errors_x[m]) << "  " << fmt_rate(rx);
    if (m) check_rate(rx);
    for (std::size_t i = 0; i < k; ++i) {
      const double rv = m ? report.rates_v[i][m - 1] : std::nan("");
      out << "  " << fmt(report.errors_v[i][m]) << "  " << fmt_rate(rv);
      if (m) check_rate(rv);
    }
    out << '\n';
  }
  out << "wrote " << (dir / "convergence.csv").string() << '\n';
  if (opts.strict && !rates_ok) {
    err << "strict: a convergence rate lies outside [" << kStrictRateLow << ", "
        << kStrictRateHigh << "]\n";
    return exit_code::kCheckFailed;
  }
  return exit_code::kSuccess;
}

int cmd_compare(const ExperimentConfig& cfg, const Options& opts, std::ostream& out,
                std::ostream& err) {
  if (cfg.scheme.scheme == Scheme::ConstrainedSphere ||
      cfg.compare_with == Scheme::ConstrainedSphere) {
    throw ConfigError("compare is defined for the unconstrained schemes only", "scheme");
  }
  const PreparedExperiment exp = prepare_and_warn(cfg, err);
  const auto dir = output_dir(cfg, opts);
  std::vector<svg::Series> dx_plot, dv_plot;
  double prev_dx = 0.0, prev_dv = 0.0;
  out << "gs vs " << to_string(cfg.compare_with) << '\n';
  for (std::size_t m = 0; m < cfg.taus.size(); ++m) {
    const double tau = cfg.taus[m];
    const DifferenceSeries series =
        scheme_difference_series(exp.model, exp.init, cfg.scheme, tau, cfg.compare_with);
    const long steps = static_cast<long>(series.t.size()) - 1;
    const auto name = "difference_N" + std::to_string(steps) + ".csv";
    {
      auto file = open_output(dir / name);
      csv::write_difference(file, series);
    }
    out << "tau " << fmt(tau) << ": max|x_n - X_n| = " << fmt(series.max_dx())
        << ", max|v1_n - V1_n| = " << fmt(series.max_dv1());
    if (m > 0 && series.max_dx() > 0.0 && series.max_dv1() > 0.0) {
      out << ", ratios " << fmt_rate(prev_dx / series.max_dx()) << " "
          << fmt_rate(prev_dv / series.max_dv1());
    }
    out << "  -> " << (dir / name).string() << '\n';
    prev_dx = series.max_dx();
    prev_dv = series.max_dv1();
    dx_plot.push_back({"tau=" + fmt(tau), series.t, series.dx});
    dv_plot.push_back({"tau=" + fmt(tau), series.t, series.dv1});
  }
  if (opts.svg) {
    auto a = open_output(dir / "difference_x.svg");
    svg::write_line_plot(a, "|x_n - X_n|", "t", "dx", dx_plot);
    auto b = open_output(dir / "difference_v1.svg");
    svg::write_line_plot(b, "|v1_n - V1_n|", "t", "dv1", dv_plot);
  }
  return exit_code::kSuccess;
}

int cmd_residual(const ExperimentConfig& cfg, const Options& opts, std::ostream& out,
                 std::ostream& err) {
  const PreparedExperiment exp = prepare_and_warn(cfg, err);
  const ResidualOrderReport report = residual_order_study(exp.model, exp.init, cfg.scheme, cfg.taus);
  const auto dir = output_dir(cfg, opts);
  {
    auto file = open_output(dir / "residual.csv");
    csv::write_residual_order(file, report);
  }
  for (std::size_t m = 0; m < report.taus.size(); ++m) {
    out << "tau " << fmt(report.taus[m]) << ": max x residual " << fmt(report.max_x_residual[m])
        << ", max v residual " << fmt(report.max_v_residual[m]) << '\n';
  }
  auto slope = [](const std::optional<double>& s) {
    return s ? fmt_rate(*s) : std::string("exact");
  };
  out << "slope x: " << slope(report.slope_x) << ", slope v: " << slope(report.slope_v) << '\n';
  out << "wrote " << (dir / "residual.csv").string() << '\n';
  return exit_code::kSuccess;
}

std::vector<CheckGroup> run_checks(const ExperimentConfig& cfg, const EnergyModel& model) {
  const int d = model.dim;
  const CheckSettings& cs = cfg.check;
  std::mt19937_64 rng(cs.seed);
  std::vector<Vector> points;
  for (int p = 0; p < cs.points; ++p) points.push_back(random_point(rng, d, cs.box));

  std::vector<CheckGroup> groups;

  double grad = 0.0, hess = 0.0;
  for (const Vector& x : points) {
    const CheckReport r = finite_difference_check(model, x, cs.fd_step);
    grad = std::max(grad, r.gradient_discrepancy);
    hess = std::max(hess, r.hessian_discrepancy);
  }
  groups.push_back(group("gradient", grad <= 1e-6, "max |FD grad E + F| = " + fmt(grad)));
  groups.push_back(group("hessian", hess <= 1e-6, "max |FD dF - J v| = " + fmt(hess)));

  double lin = 0.0, sym = 0.0;
  for (const Vector& x : points) {
    const Vector u = random_point(rng, d, 1.0), w = random_point(rng, d, 1.0);
    const double a = 0.7, b = -1.3;
    const Vector combo = model.neg_hessian_apply(x, a * u + b * w);
    const Vector ju = model.neg_hessian_apply(x, u), jw = model.neg_hessian_apply(x, w);
    lin = std::max(lin, (combo - a * ju - b * jw).norm() / (u.norm() + w.norm()));
    sym = std::max(sym, std::abs(u.dot(jw) - w.dot(ju)));
  }
  groups.push_back(group("linearity", lin <= 1e-10, "max relative defect = " + fmt(lin)));
  groups.push_back(group("symmetry", sym <= 1e-10, "max |u'Jw - w'Ju| = " + fmt(sym)));

  const double l = cfg.scheme.dimer.half_length;
  double e_full = 0.0, e_half = 0.0;
  for (const Vector& x : points) {
    const Vector v = random_unit(rng, d);
    const Vector jv = model.neg_hessian_apply(x, v);
    e_full = std::max(e_full, (dimer_hv(model, x, v, {l}) - jv).norm());
    e_half = std::max(e_half, (dimer_hv(model, x, v, {l / 2}) - jv).norm());
  }
  if (e_full <= 1e-12) {
    groups.push_back(group("dimer_order", true, "dimer exact to roundoff, error " + fmt(e_full)));
  } else {
    const double ratio = e_full / e_half;
    groups.push_back(group("dimer_order", ratio >= 3.2 && ratio <= 4.8,
                           "error(l=" + fmt(l) + ") = " + fmt(e_full) + ", error(l/2) = " +
                               fmt(e_half) + ", ratio " + fmt_rate(ratio)));
  }

  const int k = std::min(std::max(cfg.scheme.index_k, 1), d);
  double gs_defect = 0.0, gs_idem = 0.0, tp_idem = 0.0, svd_idem = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix raw = random_matrix(rng, d, k);
    const Frame f = orthonormalize_frame(raw);
    gs_defect = std::max(gs_defect, f.orthonormality_defect());
    gs_idem = std::max(gs_idem,
                       (orthonormalize_frame(f.matrix()).matrix() - f.matrix()).cwiseAbs().maxCoeff());
    const Vector x = random_unit(rng, d);
    const Vector once = tangent_project(raw.col(0), x);
    tp_idem = std::max(tp_idem, (tangent_project(once, x) - once).cwiseAbs().maxCoeff());
    const Frame p = svd_projection_retract(raw);
    svd_idem = std::max(svd_idem,
                        (svd_projection_retract(p.matrix()).matrix() - p.matrix()).cwiseAbs().maxCoeff());
  }
  const bool manifold_ok =
      gs_defect <= 1e-12 && gs_idem <= 1e-14 && tp_idem <= 1e-14 && svd_idem <= 1e-13;
  groups.push_back(group("manifold", manifold_ok,
                         "GS defect " + fmt(gs_defect) + ", GS idempotence " + fmt(gs_idem) +
                             ", projection idempotence " + fmt(tp_idem) +
                             ", SVD idempotence " + fmt(svd_idem)));
  return groups;
}

int cmd_check(const ExperimentConfig& cfg, const EnergyModel& model, std::ostream& out) {
  bool all = true;
  for (const CheckGroup& g : run_checks(cfg, model)) {
    out << (g.passed ? "PASS " : "FAIL ") << g.name << ": " << g.detail << '\n';
    all = all && g.passed;
  }
  return all ? exit_code::kSuccess : exit_code::kCheckFailed;
}

int dispatch(const ExperimentConfig& cfg, const Options& opts, std::ostream& out,
             std::ostream& err) {
  try {
    switch (cfg.mode) {
      case Mode::Run: return cmd_run(cfg, opts, out, err);
      case Mode::Converge: return cmd_converge(cfg, opts, out, err);
      case Mode::Compare: return cmd_compare(cfg, opts, out, err);
      case Mode::Residual: return cmd_residual(cfg, opts, out, err);
      case Mode::Check: return cmd_check(cfg, prepare_and_warn(cfg, err).model, out);
    }
  } catch (const ConfigError& e) {
    err << "config error";
    if (!e.field().empty()) err << " [" << e.field() << "]";
    err << ": " << e.what() << '\n';
    return exit_code::kConfigError;
  } catch (const DivergenceError& e) {
    err << "divergence: " << e.what() << '\n';
    return exit_code::kDivergence;
  } catch (const DegenerateDirectionError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return exit_code::kDivergence;
  } catch (const EvaluationError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return exit_code::kDivergence;
  }
  return exit_code::kConfigError;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"High-index saddle dynamics experiments"};
  Options opts;
  std::string config, output;
  app.add_option("--config", config, "experiment config (JSON)")->required();
  app.add_option("--output", output, "output directory (overrides output_dir)");
  app.add_flag("--strict", opts.strict, "converge: fail if a rate leaves [0.8, 1.3]");
  app.add_flag("--svg", opts.svg, "also write SVG plots");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::kSuccess;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return exit_code::kConfigError;
  }
  opts.config = config;
  if (!output.empty()) opts.output = output;

  ExperimentConfig cfg;
  try {
    cfg = load_config(opts.config);
  } catch (const ConfigError& e) {
    err << "config error";
    if (!e.field().empty()) err << " [" << e.field() << "]";
    err << ": " << e.what() << '\n';
    return exit_code::kConfigError;
  }
  return dispatch(cfg, opts, out, err);
}

}  // namespace hisd::cli
