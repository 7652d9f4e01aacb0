#include "ptkr/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ptkr/errors.hpp"

namespace ptkr {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  static Axis fit(double lo, double hi, bool log) {
    if (!(lo <= hi)) {
      lo = log ? 1.0 : 0.0;
      hi = log ? 10.0 : 1.0;
    }
    if (log) {
      lo = std::log10(lo);
      hi = std::log10(hi);
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    return {lo, hi, log};
  }
  bool drawable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
  double unit(double v) const { return ((log ? std::log10(v) : v) - lo) / (hi - lo); }
  double value_at(double u) const {
    const double t = lo + u * (hi - lo);
    return log ? std::pow(10.0, t) : t;
  }
};

double px(const Axis& a, double v) { return kLeft + a.unit(v) * (kWidth - kLeft - kRight); }
double py(const Axis& a, double v) { return kHeight - kBottom - a.unit(v) * (kHeight - kTop - kBottom); }

std::string header(const std::string& title) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" fill=\"white\"/>\n";
  if (!title.empty()) {
    out += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" +
           escape(title) + "</text>\n";
  }
  return out;
}

std::string axes(const Axis& ax, const Axis& ay, const std::string& x_label,
                 const std::string& y_label) {
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom;
  const double y1 = kTop;
  std::string out = "<g stroke=\"black\" fill=\"none\">\n";
  out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(y0) + "\"/>\n";
  out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(y1) + "\"/>\n";
  out += "</g>\n<g font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double u = i / 4.0;
    const double xp = x0 + u * (x1 - x0);
    const double yp = y0 - u * (y0 - y1);
    out += "<text x=\"" + num(xp) + "\" y=\"" + num(y0 + 16) + "\" text-anchor=\"middle\">" +
           tick_label(ax.value_at(u)) + "</text>\n";
    out += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(yp + 4) + "\" text-anchor=\"end\">" +
           tick_label(ay.value_at(u)) + "</text>\n";
  }
  out += "</g>\n";
  out += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 16) +
         "\" text-anchor=\"middle\" font-size=\"13\">" + escape(x_label) + "</text>\n";
  out += "<text x=\"16\" y=\"" + num((y0 + y1) / 2) + "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 " +
         num((y0 + y1) / 2) + ")\">" + escape(y_label) + "</text>\n";
  return out;
}

// Blue to red through white.
std::string color(double u) {
  u = std::clamp(u, 0.0, 1.0);
  int r, g, b;
  if (u < 0.5) {
    const double s = u / 0.5;
    r = static_cast<int>(std::lround(255 * s));
    g = static_cast<int>(std::lround(255 * s));
    b = 255;
  } else {
    const double s = (u - 0.5) / 0.5;
    r = 255;
    g = static_cast<int>(std::lround(255 * (1 - s)));
    b = static_cast<int>(std::lround(255 * (1 - s)));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

// Cell edges halfway between neighbouring axis values.
std::vector<double> edges(const std::vector<double>& v, const Axis& a) {
  std::vector<double> u(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) u[i] = a.log ? std::log10(v[i]) : v[i];
  std::vector<double> e(v.size() + 1);
  if (v.size() == 1) {
    e[0] = u[0] - 0.5;
    e[1] = u[0] + 0.5;
  } else {
    for (std::size_t i = 1; i < v.size(); ++i) e[i] = 0.5 * (u[i - 1] + u[i]);
    e.front() = u.front() - (e[1] - u.front());
    e.back() = u.back() + (u.back() - e[v.size() - 1]);
  }
  for (double& x : e) x = a.log ? std::pow(10.0, x) : x;
  return e;
}

}  // namespace

std::string render_svg(const LinePlot& plot) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  const Axis probe_x{0, 1, plot.log_x};
  const Axis probe_y{0, 1, plot.log_y};
  for (const auto& s : plot.series) {
    if (s.x.size() != s.y.size()) throw InvalidArgument("series '" + s.name + "': x and y lengths differ");
    for (Eigen::Index i = 0; i < s.x.size(); ++i) {
      if (!probe_x.drawable(s.x(i)) || !probe_y.drawable(s.y(i))) continue;
      xlo = std::min(xlo, s.x(i));
      xhi = std::max(xhi, s.x(i));
      ylo = std::min(ylo, s.y(i));
      yhi = std::max(yhi, s.y(i));
    }
  }
  const Axis ax = Axis::fit(xlo, xhi, plot.log_x);
  const Axis ay = Axis::fit(ylo, yhi, plot.log_y);

  std::string out = header(plot.title);
  out += axes(ax, ay, plot.x_label, plot.y_label);
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* stroke = kPalette[k % kPalette.size()];
    std::string points;
    for (Eigen::Index i = 0; i < s.x.size(); ++i) {
      if (!ax.drawable(s.x(i)) || !ay.drawable(s.y(i))) continue;
      if (!points.empty()) points += ' ';
      points += num(px(ax, s.x(i))) + "," + num(py(ay, s.y(i)));
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    const double ly = kTop + 16.0 * (k + 1);
    out += "<text x=\"" + num(kWidth - kRight + 12) + "\" y=\"" + num(ly) + "\" font-size=\"12\" fill=\"" +
           stroke + "\">" + escape(s.name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string render_svg(const HeatPlot& plot) {
  if (plot.x.empty() || plot.y.empty()) throw InvalidArgument("heat plot needs non-empty axes");
  if (plot.z.rows() != static_cast<Eigen::Index>(plot.y.size()) ||
      plot.z.cols() != static_cast<Eigen::Index>(plot.x.size())) {
    throw InvalidArgument("heat plot grid does not match its axes");
  }
  const Axis probe_x{0, 1, plot.log_x};
  const Axis probe_y{0, 1, plot.log_y};
  for (double v : plot.x) {
    if (!probe_x.drawable(v)) throw InvalidArgument("heat plot x axis has undrawable values");
  }
  for (double v : plot.y) {
    if (!probe_y.drawable(v)) throw InvalidArgument("heat plot y axis has undrawable values");
  }
  const Axis ux{plot.log_x ? std::log10(plot.x.front()) : plot.x.front(),
                plot.log_x ? std::log10(plot.x.back()) : plot.x.back(), plot.log_x};
  const Axis uy{plot.log_y ? std::log10(plot.y.front()) : plot.y.front(),
                plot.log_y ? std::log10(plot.y.back()) : plot.y.back(), plot.log_y};
  const auto ex = edges(plot.x, ux);
  const auto ey = edges(plot.y, uy);
  const Axis ax = Axis::fit(ex.front(), ex.back(), plot.log_x);
  const Axis ay = Axis::fit(ey.front(), ey.back(), plot.log_y);

  double zlo = std::numeric_limits<double>::infinity(), zhi = -zlo;
  for (Eigen::Index i = 0; i < plot.z.size(); ++i) {
    const double v = plot.z.data()[i];
    if (!std::isfinite(v)) continue;
    zlo = std::min(zlo, v);
    zhi = std::max(zhi, v);
  }
  const double span = zhi > zlo ? zhi - zlo : 1.0;

  std::string out = header(plot.title);
  out += "<g stroke=\"none\">\n";
  for (std::size_t i = 0; i < plot.y.size(); ++i) {
    for (std::size_t j = 0; j < plot.x.size(); ++j) {
      const double v = plot.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double xa = px(ax, ex[j]);
      const double xb = px(ax, ex[j + 1]);
      const double ya = py(ay, ey[i + 1]);
      const double yb = py(ay, ey[i]);
      const std::string fill = std::isfinite(v) ? color((v - zlo) / span) : "#bbbbbb";
      out += "<rect x=\"" + num(std::min(xa, xb)) + "\" y=\"" + num(std::min(ya, yb)) +
             "\" width=\"" + num(std::abs(xb - xa)) + "\" height=\"" + num(std::abs(yb - ya)) +
             "\" fill=\"" + fill + "\"/>\n";
    }
  }
  out += "</g>\n";
  out += axes(ax, ay, plot.x_label, plot.y_label);
  out += "<text x=\"" + num(kWidth - kRight + 12) + "\" y=\"" + num(kTop + 16) +
         "\" font-size=\"12\">min " + tick_label(zlo) + "</text>\n";
  out += "<text x=\"" + num(kWidth - kRight + 12) + "\" y=\"" + num(kTop + 32) +
         "\" font-size=\"12\">max " + tick_label(zhi) + "</text>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace ptkr
