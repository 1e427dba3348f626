// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hisd/config.hpp"
#include "hisd/convergence_lab.hpp"
#include "hisd/manifold_ops.hpp"
#include "hisd/schemes.hpp"

#include "oracles.hpp"

using namespace hisd;

namespace {

const std::filesystem::path kConfigs = HISD_CONFIG_DIR;

int g_failures = 0;

void report(int id, bool ok, const std::string& title, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s | %s\n", ok ? "PASS" : "FAIL", id, title.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(const char* pattern, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

std::string join(const std::vector<double>& values, const char* pattern = "%.3g") {
  std::string s = "{";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ", ";
    s += fmt(pattern, values[i]);
  }
  return s + "}";
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

bool within_factor(double value, double target, double factor) {
  return value >= target / factor && value <= target * factor;
}

struct Setup {
  EnergyModel model;
  SaddleState init;
  SchemeConfig cfg;
  std::vector<double> taus;
  double ref_tau = kDefaultReferenceTau;
};

Setup load(const std::string& name, bool force_orthonormal = false) {
  ExperimentConfig cfg = load_config(kConfigs / name);
  cfg.orthonormalize_v0 = cfg.orthonormalize_v0 || force_orthonormal;
  PreparedExperiment p = prepare(cfg);
  return {std::move(p.model), std::move(p.init), cfg.scheme, cfg.taus, cfg.ref_tau};
}

std::vector<double> literal_taus() { return {0x1p-6, 0x1p-7, 0x1p-8, 0x1p-9}; }

// Every trajectory produced by the suite, audited in criterion 7.
struct Audit {
  double frame_defect = 0.0;
  double sphere_defect = 0.0;
  double tangent_defect = 0.0;
  long states = 0;
  int runs = 0;

  void add(const Trajectory& traj) {
    ++runs;
    const bool constrained = traj.config.scheme == Scheme::ConstrainedSphere;
    for (std::size_t n = 1; n < traj.states.size(); ++n) {
      const SaddleState& s = traj.states[n];
      ++states;
      frame_defect = std::max(frame_defect, s.frame.orthonormality_defect());
      if (constrained) {
        sphere_defect = std::max(sphere_defect, std::abs(s.x.norm() - 1.0));
        tangent_defect =
            std::max(tangent_defect, (s.frame.matrix().transpose() * s.x).cwiseAbs().maxCoeff());
      }
    }
  }
} g_audit;

Trajectory audited_run(const Setup& s, double tau, Scheme scheme) {
  SchemeConfig cfg = s.cfg;
  cfg.tau = tau;
  cfg.scheme = scheme;
  Trajectory t = run(s.model, s.init, cfg);
  g_audit.add(t);
  return t;
}

void audit_all(const Setup& s) {
  for (double tau : s.taus) audited_run(s, tau, s.cfg.scheme);
}

bool rates_ok(const std::vector<double>& rates, const std::vector<double>& targets, double tol) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (i >= rates.size() || !within(rates[i], targets[i], tol)) return false;
  }
  return true;
}

void criterion_table(int id, const std::string& config, bool index2) {
  const Setup s = load(config);
  const ConvergenceReport r = convergence_table(s.model, s.init, s.cfg, s.taus, s.ref_tau);
  audit_all(s);
  audited_run(s, s.ref_tau, s.cfg.scheme);

  const std::vector<double> cr_x = index2 ? std::vector<double>{1.06, 1.05, 1.06}
                                          : std::vector<double>{1.04, 1.04, 1.06};
  const std::vector<double> cr_v = index2 ? std::vector<double>{1.01, 1.00, 1.03}
                                          : std::vector<double>{0.99, 1.02, 1.05};
  const std::vector<double> ex = index2 ? std::vector<double>{2.27e-1, 1.09e-1, 5.28e-2, 2.53e-2}
                                        : std::vector<double>{1.23e-1, 6.00e-2, 2.92e-2, 1.40e-2};
  const std::vector<double> ev = index2 ? std::vector<double>{1.43e-1, 7.08e-2, 3.53e-2, 1.72e-2}
                                        : std::vector<double>{9.83e-2, 4.94e-2, 2.44e-2, 1.18e-2};

  bool ok = rates_ok(r.rates_x, cr_x, 0.15);
  for (const auto& rv : r.rates_v) ok = ok && rates_ok(rv, cr_v, 0.15);
  for (std::size_t m = 0; m < ex.size(); ++m) {
    ok = ok && within_factor(r.errors_x[m], ex[m], 2.0);
    for (const auto& evi : r.errors_v) ok = ok && within_factor(evi[m], ev[m], 2.0);
  }
  std::string detail = "CR_x " + join(r.rates_x) + " e_x " + join(r.errors_x);
  for (std::size_t i = 0; i < r.errors_v.size(); ++i) {
    detail += " CR_v" + std::to_string(i + 1) + " " + join(r.rates_v[i]) + " e_v" +
              std::to_string(i + 1) + " " + join(r.errors_v[i]);
  }
  if (index2) {
    double spread = 0.0;
    for (std::size_t m = 0; m < r.taus.size(); ++m) {
      spread = std::max(spread, std::abs(r.errors_v[0][m] - r.errors_v[1][m]) /
                                    std::max(r.errors_v[0][m], r.errors_v[1][m]));
    }
    ok = ok && spread < 0.05;
    detail += " v1/v2 spread " + fmt("%.2e", spread);
  }
  report(id, ok, index2 ? "index-2 convergence table" : "index-1 convergence table", detail);
}

void criterion_3() {
  const Setup one = load("fig1_index1.json");
  const Setup two = load("fig1_index2.json");
  const Trajectory a = audited_run(one, one.cfg.tau, one.cfg.scheme);
  const Trajectory b = audited_run(two, two.cfg.tau, two.cfg.scheme);
  const double da = a.states.back().x.norm();
  const double db = (b.states.back().x - Eigen::Vector2d(1.0, 0.0)).norm();
  report(3, da < 1e-2 && db < 1e-2, "final states at tau = 1/100",
         "index-1 |x_N - (0,0)| " + fmt("%.2e", da) + ", index-2 |x_N - (1,0)| " + fmt("%.2e", db));
}

void criterion_4() {
  const Setup s = load("fig2.json");
  std::vector<double> dx, dv;
  bool zero_start = true;
  for (double tau : s.taus) {
    const DifferenceSeries d = scheme_difference_series(s.model, s.init, s.cfg, tau);
    zero_start = zero_start && d.dx.front() == 0.0 && d.dv1.front() == 0.0;
    dx.push_back(d.max_dx());
    dv.push_back(d.max_dv1());
    audited_run(s, tau, Scheme::UnconstrainedGS);
    audited_run(s, tau, Scheme::UnconstrainedLM);
  }
  std::vector<double> ratios;
  bool ok = zero_start;
  for (std::size_t m = 1; m < dx.size(); ++m) {
    ratios.push_back(dx[m - 1] / dx[m]);
    ratios.push_back(dv[m - 1] / dv[m]);
  }
  for (double q : ratios) ok = ok && within(q, 2.0, 0.5);
  report(4, ok, "GS vs LM difference halves with tau",
         "max dx " + join(dx, "%.3e") + " max dv1 " + join(dv, "%.3e") + " ratios (x,v) " +
             join(ratios) + (zero_start ? " zero at n=0" : " NONZERO at n=0"));
}

void criterion_5() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"fig1_index1.json", "table2.json"}) {
    Setup s = load(name, true);
    s.taus = literal_taus();
    const ResidualOrderReport r = residual_order_study(s.model, s.init, s.cfg, s.taus);
    audit_all(s);
    const bool pass = r.slope_v && *r.slope_v >= 0.8 && *r.slope_v <= 1.2;
    ok = ok && pass;
    detail += std::string(s.cfg.index_k == 1 ? "index-1" : "index-2") + " slope " +
              (r.slope_v ? fmt("%.3f", *r.slope_v) : std::string("n/a")) + " max " +
              join(r.max_v_residual, "%.2e") + "  ";
  }
  report(5, ok, "unconstrained frame residual order", detail);
}

Setup random_sphere_setup() {
  std::mt19937_64 rng(20240601);
  const Matrix a = oracle::random_symmetric(rng, 5);
  const Vector x0 = oracle::random_vector(rng, 5).normalized();
  Matrix v0 = oracle::random_matrix(rng, 5, 2);
  v0 -= x0 * (x0.transpose() * v0);
  Setup s{make_quadratic(a), make_state(x0, oracle::q_factor(v0)), {}, literal_taus()};
  s.cfg.scheme = Scheme::ConstrainedSphere;
  s.cfg.index_k = 2;
  s.cfg.horizon = 7.0;
  return s;
}

void criterion_6() {
  bool ok = true;
  std::string detail;
  const auto band = [](const std::optional<double>& slope) {
    return slope && *slope >= 0.8 && *slope <= 1.2;
  };
  const auto describe = [](const std::optional<double>& slope) {
    return slope ? fmt("%.3f", *slope) : std::string("n/a");
  };
  Setup sphere = load("residual_sphere.json");
  Setup random5 = random_sphere_setup();
  for (Setup* s : {&sphere, &random5}) {
    const ResidualOrderReport r = residual_order_study(s->model, s->init, s->cfg, s->taus);
    audit_all(*s);
    ok = ok && band(r.slope_x) && band(r.slope_v);
    detail += (s == &sphere ? std::string("sphere quadratic") : std::string("random 5-D k=2")) +
              " slope x " + describe(r.slope_x) + " v " + describe(r.slope_v) + "  ";
  }
  report(6, ok, "constrained residual order", detail);
}

void criterion_7() {
  const bool ok = g_audit.frame_defect <= 1e-12 && g_audit.sphere_defect <= 1e-12 &&
                  g_audit.tangent_defect <= 1e-12;
  report(7, ok, "manifold invariants over all acceptance runs",
         std::to_string(g_audit.runs) + " runs, " + std::to_string(g_audit.states) +
             " states; max |V^T V - I| " + fmt("%.2e", g_audit.frame_defect) + ", max ||x|-1| " +
             fmt("%.2e", g_audit.sphere_defect) + ", max |v^T x| " +
             fmt("%.2e", g_audit.tangent_defect));
}

double max_increment(const Trajectory& t) {
  double m = 0.0;
  for (std::size_t n = 1; n < t.states.size(); ++n) {
    const Matrix dv = t.states[n].frame.matrix() - t.states[n - 1].frame.matrix();
    m = std::max(m, dv.colwise().norm().maxCoeff());
  }
  return m / t.config.tau;
}

void criterion_8() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"fig1_index1.json", "table2.json"}) {
    Setup s = load(name, true);
    std::vector<double> bounds;
    for (double tau : literal_taus()) bounds.push_back(max_increment(audited_run(s, tau, s.cfg.scheme)));
    const auto [lo, hi] = std::minmax_element(bounds.begin(), bounds.end());
    const double variation = (*hi - *lo) / *lo;
    ok = ok && variation < 0.3;
    detail += std::string(s.cfg.index_k == 1 ? "index-1 " : "index-2 ") + join(bounds, "%.4f") +
              " variation " + fmt("%.1f%%", 100.0 * variation) + "  ";
  }
  report(8, ok, "bounded frame increments", detail);
}

void criterion_9() {
  Matrix a(3, 3);
  a << 2.0, 1.0, 0.0, 1.0, -1.0, 0.5, 0.0, 0.5, 3.0;
  const EnergyModel model = make_quadratic(a);
  SchemeConfig cfg;
  cfg.horizon = 2.0;
  const std::vector<double> taus = {0x1p-5, 0x1p-6, 0x1p-7, 0x1p-8};

  // Frame starts on an eigenvector, so x(t) = exp(-(I - 2 v v^T) A t) x0 and v is fixed.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  const Vector v_eig = eig.eigenvectors().col(0);
  Vector x0(3);
  x0 << 1.0, 0.5, -0.3;
  const Matrix reflect_a = (Matrix::Identity(3, 3) - 2.0 * v_eig * v_eig.transpose()) * a;
  const ExactSolution exact_x = [&](double t) {
    return std::make_pair(Vector(oracle::expm_symmetric(-reflect_a, t) * x0), Matrix(v_eig));
  };
  const ConvergenceReport rx = convergence_table(model, make_state(x0, v_eig), cfg, taus, exact_x);

  // x0 at the stationary point, so V(t) is the Q factor of exp(-A t) V0.
  const Matrix v0 = Vector::Ones(3).normalized();
  const ExactSolution exact_v = [&](double t) {
    return std::make_pair(Vector(Vector::Zero(3)),
                          oracle::q_factor(oracle::expm_symmetric(-a, t) * v0));
  };
  const ConvergenceReport rv =
      convergence_table(model, make_state(Vector::Zero(3), v0), cfg, taus, exact_v);

  for (double tau : taus) {
    SchemeConfig c = cfg;
    c.tau = tau;
    g_audit.add(run(model, make_state(x0, v_eig), c));
    g_audit.add(run(model, make_state(Vector::Zero(3), v0), c));
  }

  bool ok = true;
  for (double r : rx.rates_x) ok = ok && within(r, 1.0, 0.1);
  for (double r : rv.rates_v[0]) ok = ok && within(r, 1.0, 0.1);
  report(9, ok, "convergence against closed-form linear flow",
         "CR_x " + join(rx.rates_x) + " e_x " + join(rx.errors_x) + " CR_v " +
             join(rv.rates_v[0]) + " e_v " + join(rv.errors_v[0]));
}

void criterion_10() {
  std::string detail;

  const EnergyModel dw = make_double_well();
  Vector x(2), v(2);
  x << 0.7, -0.4;
  v << 0.8, 0.6;
  const Vector exact = dw.neg_hessian_apply(x, v);
  const double e1 = (dimer_hv(dw, x, v, {1e-2}) - exact).norm();
  const double e2 = (dimer_hv(dw, x, v, {5e-3}) - exact).norm();
  const double factor = e1 / e2;
  bool ok = within(factor, 4.0, 0.8);
  detail += "dimer factor " + fmt("%.3f", factor);

  std::mt19937_64 rng(7);
  double idem = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix basis = oracle::random_orthonormal(rng, 6, 2);
    const Vector once = gram_schmidt(basis, oracle::random_vector(rng, 6));
    idem = std::max(idem, (gram_schmidt(basis, once) - once).cwiseAbs().maxCoeff());
    const Vector p = oracle::random_vector(rng, 6).normalized();
    const Vector t1 = tangent_project(oracle::random_vector(rng, 6), p);
    idem = std::max(idem, (tangent_project(t1, p) - t1).cwiseAbs().maxCoeff());
  }
  ok = ok && idem <= 1e-14;
  detail += ", idempotence " + fmt("%.1e", idem);

  double polar_gap = 0.0;
  int beaten = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix raw = oracle::random_matrix(rng, 6, 3);
    const Matrix p = svd_projection_retract(raw).matrix();
    polar_gap = std::max(polar_gap, (p - oracle::polar_normal_equations(raw)).cwiseAbs().maxCoeff());
    const double best = (p - raw).norm();
    for (int c = 0; c < 1000; ++c) {
      if ((oracle::random_orthonormal(rng, 6, 3) - raw).norm() < best) ++beaten;
    }
  }
  ok = ok && beaten == 0 && polar_gap <= 1e-10;
  detail += ", random frames closer than polar " + std::to_string(beaten) + "/10000" +
            ", polar oracle gap " + fmt("%.1e", polar_gap);
  report(10, ok, "kernel properties", detail);
}

template <class F>
void guarded(int id, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, "aborted", e.what());
  }
}

}  // namespace

int main() {
  guarded(1, [] { criterion_table(1, "table1.json", false); });
  guarded(2, [] { criterion_table(2, "table2.json", true); });
  guarded(3, criterion_3);
  guarded(4, criterion_4);
  guarded(5, criterion_5);
  guarded(6, criterion_6);
  guarded(8, criterion_8);
  guarded(9, criterion_9);
  guarded(10, criterion_10);
  guarded(7, criterion_7);
  std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
