#pragma once

#include <ostream>
#include <string>

#include "hisd/convergence_lab.hpp"

namespace hisd::csv {

/// Scientific notation with 12 significant digits. NaN renders as an empty cell.
std::string format_number(double value);

/// t, x1..xd, v1_1..v1_d, v2_1, ... (v<i>_<component>)
void write_trajectory(std::ostream& out, const Trajectory& traj);

/// tau, err_x, cr_x, err_v1, cr_v1, ...; the first row's CR cells are empty.
void write_convergence(std::ostream& out, const ConvergenceReport& report);

/// t, dx, dv1
void write_difference(std::ostream& out, const DifferenceSeries& series);

/// tau, max_res_x, max_res_v
void write_residual_order(std::ostream& out, const ResidualOrderReport& report);

}  // namespace hisd::csv
