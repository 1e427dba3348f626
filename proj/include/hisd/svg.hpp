#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hisd::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal line plot: axes box, min/max tick labels, one polyline per series
/// and a legend. Meant for eyeballing shapes only.
void write_line_plot(std::ostream& out, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<Series>& series);

}  // namespace hisd::svg
