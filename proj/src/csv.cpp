#include "hisd/csv.hpp"

#include <cmath>
#include <cstdio>

namespace hisd::csv {

std::string format_number(double value) {
  if (std::isnan(value)) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", value);
  return buf;
}

void write_trajectory(std::ostream& out, const Trajectory& traj) {
  if (traj.states.empty()) return;
  const auto d = traj.states.front().x.size();
  const int k = traj.states.front().frame.count();
  out << "t";
  for (Eigen::Index c = 0; c < d; ++c) out << ",x" << c + 1;
  for (int i = 0; i < k; ++i) {
    for (Eigen::Index c = 0; c < d; ++c) out << ",v" << i + 1 << '_' << c + 1;
  }
  out << '\n';
  for (const SaddleState& s : traj.states) {
    out << format_number(s.time);
    for (Eigen::Index c = 0; c < d; ++c) out << ',' << format_number(s.x(c));
    for (int i = 0; i < k; ++i) {
      for (Eigen::Index c = 0; c < d; ++c) out << ',' << format_number(s.frame.matrix()(c, i));
    }
    out << '\n';
  }
}

void write_convergence(std::ostream& out, const ConvergenceReport& report) {
  const std::size_t k = report.errors_v.size();
  out << "tau,err_x,cr_x";
  for (std::size_t i = 0; i < k; ++i) out << ",err_v" << i + 1 << ",cr_v" << i + 1;
  out << '\n';
  for (std::size_t m = 0; m < report.taus.size(); ++m) {
    auto cr = [m](const std::vector<double>& rates) {
      return m == 0 ? std::string() : format_number(rates[m - 1]);
    };
    out << format_number(report.taus[m]) << ',' << format_number(report.errors_x[m]) << ','
        << cr(report.rates_x);
    for (std::size_t i = 0; i < k; ++i) {
      out << ',' << format_number(report.errors_v[i][m]) << ',' << cr(report.rates_v[i]);
    }
    out << '\n';
  }
}

void write_difference(std::ostream& out, const DifferenceSeries& series) {
  out << "t,dx,dv1\n";
  for (std::size_t n = 0; n < series.t.size(); ++n) {
    out << format_number(series.t[n]) << ',' << format_number(series.dx[n]) << ','
        << format_number(series.dv1[n]) << '\n';
  }
}

void write_residual_order(std::ostream& out, const ResidualOrderReport& report) {
  out << "tau,max_res_x,max_res_v\n";
  for (std::size_t m = 0; m < report.taus.size(); ++m) {
    out << format_number(report.taus[m]) << ',' << format_number(report.max_x_residual[m]) << ','
        << format_number(report.max_v_residual[m]) << '\n';
  }
}

}  // namespace hisd::csv
