#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace ptkr {

struct LineSeries {
  std::string name;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<LineSeries> series;
};

// One colored rectangle per cell; z(i, j) belongs to (x[j], y[i]).
struct HeatPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
  Eigen::MatrixXd z;
  bool log_x = false;
  bool log_y = false;
};

// Points that cannot be drawn (non-finite, or <= 0 on a log axis) are
// dropped. Every series becomes exactly one <polyline>.
std::string render_svg(const LinePlot& plot);
std::string render_svg(const HeatPlot& plot);

}  // namespace ptkr
