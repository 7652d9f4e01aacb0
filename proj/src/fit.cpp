#include "ptkr/fit.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ptkr/errors.hpp"

namespace ptkr {

namespace {

struct Selection {
  std::vector<double> x;
  std::vector<double> y;
};

Selection select(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                 TimeWindow window) {
  if (x.size() != y.size()) throw InvalidArgument("fit: abscissa and ordinate lengths differ");
  Selection s;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (window.contains(x(i))) {
      s.x.push_back(x(i));
      s.y.push_back(y(i));
    }
  }
  return s;
}

Eigen::Map<const Eigen::VectorXd> view(const std::vector<double>& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

FitResult make_result(double value, double prefactor, const LinearFit& line, const Selection& s) {
  const auto [lo, hi] = std::minmax_element(s.x.begin(), s.x.end());
  return {value, prefactor, line.r_squared, *lo, *hi, line.points};
}

}  // namespace

TimeWindow default_power_law_window(const Eigen::Ref<const Eigen::VectorXd>& t) {
  if (t.size() == 0) throw FitError("empty_window", "no abscissae to derive a window from");
  const double hi = t.maxCoeff();
  return {hi / 25.0, hi};
}

TimeWindow default_saturation_window(const Eigen::Ref<const Eigen::VectorXd>& t) {
  if (t.size() == 0) throw FitError("empty_window", "no abscissae to derive a window from");
  const double hi = t.maxCoeff();
  return {hi / 2.0, hi};
}

LinearFit least_squares(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) throw InvalidArgument("least_squares: length mismatch");
  const Eigen::Index n = x.size();
  if (n < 2) throw FitError("too_few_points", "least_squares needs at least two points");
  const double mx = x.mean();
  const double my = y.mean();
  const Eigen::ArrayXd dx = x.array() - mx;
  const Eigen::ArrayXd dy = y.array() - my;
  const double sxx = (dx * dx).sum();
  if (!(sxx > 0.0)) throw FitError("degenerate_abscissa", "least_squares: all abscissae equal");
  LinearFit fit;
  fit.points = n;
  fit.slope = (dx * dy).sum() / sxx;
  fit.intercept = my - fit.slope * mx;
  const double syy = (dy * dy).sum();
  const double ss_res = ((y.array() - (fit.slope * x.array() + fit.intercept)).square()).sum();
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  if (syy == 0.0) fit.slope = 0.0;
  return fit;
}

FitResult fit_power_law(const Eigen::Ref<const Eigen::VectorXd>& t,
                        const Eigen::Ref<const Eigen::VectorXd>& y, TimeWindow window) {
  const Selection s = select(t, y, window);
  if (static_cast<Eigen::Index>(s.x.size()) < kMinPowerLawPoints) {
    throw FitError("too_few_points", "power-law fit needs at least 8 points in the window");
  }
  std::vector<double> lx(s.x.size());
  std::vector<double> ly(s.y.size());
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) {
      throw FitError("non_positive_data", "power-law fit requires positive t and y");
    }
    lx[i] = std::log(s.x[i]);
    ly[i] = std::log(s.y[i]);
  }
  const LinearFit line = least_squares(view(lx), view(ly));
  return make_result(line.slope, std::exp(line.intercept), line, s);
}

FitResult fit_localization_length(const Eigen::Ref<const Eigen::VectorXd>& density,
                                  const BasisSpec& basis, LocalizationFitOptions options) {
  if (density.size() != basis.size()) throw InvalidArgument("density length does not match basis");
  const double unit = options.axis == LocalizationAxis::momentum ? basis.hbar_eff() : 1.0;
  const double total = density.sum();
  if (!(total > 0.0)) throw FitError("insufficient_decay", "density is empty");

  double second = 0.0;
  for (Eigen::Index k = 0; k < density.size(); ++k) {
    const double x = basis.index_at(k) * unit;
    second += density(k) * x * x;
  }
  const double l0 = std::sqrt(second / total / 2.0);
  const double core = options.core_factor * l0;

  double l_sum = 0.0;
  double r2_sum = 0.0;
  double log_pref_sum = 0.0;
  double x_hi = 0.0;
  Eigen::Index points = 0;
  for (int side : {+1, -1}) {
    std::vector<double> x;
    std::vector<double> ly;
    double lmin = std::numeric_limits<double>::infinity();
    double lmax = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < density.size(); ++k) {
      const double pos = basis.index_at(k) * unit;
      const double d = density(k) / total;
      if (pos * side < core || pos == 0.0 || !(d > options.floor)) continue;
      x.push_back(std::abs(pos));
      ly.push_back(std::log(d));
      lmin = std::min(lmin, ly.back());
      lmax = std::max(lmax, ly.back());
    }
    if (x.size() < 2 || (lmax - lmin) / std::log(10.0) < options.min_decades) {
      throw FitError("insufficient_decay",
                     "density tail spans fewer than the required decades beyond the core");
    }
    const LinearFit line = least_squares(view(x), view(ly));
    if (!(line.slope < 0.0)) throw FitError("insufficient_decay", "density does not decay");
    l_sum += -1.0 / line.slope;
    r2_sum += line.r_squared;
    log_pref_sum += line.intercept;
    x_hi = std::max(x_hi, *std::max_element(x.begin(), x.end()));
    points += line.points;
  }
  return {l_sum / 2.0, std::exp(log_pref_sum / 2.0), r2_sum / 2.0, core, x_hi, points};
}

FitResult fit_ballistic_rate(const Eigen::Ref<const Eigen::VectorXd>& t,
                             const Eigen::Ref<const Eigen::VectorXd>& y, BallisticMode mode,
                             TimeWindow window) {
  const Selection s = select(t, y, window);
  for (std::size_t i = 0; i < s.y.size(); ++i) {
    if (!(s.y[i] > 0.0)) throw FitError("non_positive_data", "ballistic fit requires positive data");
  }
  std::vector<double> x = s.x;
  if (mode == BallisticMode::quadratic) {
    for (double& v : x) v *= v;
  }
  const LinearFit line = least_squares(view(x), view(s.y));
  if (mode == BallisticMode::quadratic) {
    if (line.slope < 0.0) throw FitError("non_positive_data", "negative quadratic coefficient");
    return make_result(std::sqrt(line.slope), line.intercept, line, s);
  }
  return make_result(line.slope, line.intercept, line, s);
}

FitResult k_scaling_exponent(const Eigen::Ref<const Eigen::VectorXd>& kick_strengths,
                             const Eigen::Ref<const Eigen::VectorXd>& saturated_otoc) {
  if (kick_strengths.size() < 4) throw FitError("too_few_points", "K scaling needs >= 4 values");
  if (kick_strengths.size() != saturated_otoc.size()) throw InvalidArgument("K table length mismatch");
  Eigen::VectorXd lx(kick_strengths.size());
  Eigen::VectorXd ly(kick_strengths.size());
  for (Eigen::Index i = 0; i < lx.size(); ++i) {
    if (!(kick_strengths(i) > 0.0) || !(saturated_otoc(i) > 0.0)) {
      throw FitError("non_positive_data", "K scaling requires positive K and C");
    }
    lx(i) = std::log(kick_strengths(i));
    ly(i) = std::log(saturated_otoc(i));
  }
  const LinearFit line = least_squares(lx, ly);
  return {line.slope, std::exp(line.intercept), line.r_squared, kick_strengths.minCoeff(),
          kick_strengths.maxCoeff(), line.points};
}

double time_avg(const Eigen::Ref<const Eigen::VectorXd>& t, const Eigen::Ref<const Eigen::VectorXd>& y,
                TimeWindow window) {
  const Selection s = select(t, y, window);
  if (s.y.empty()) throw FitError("empty_window", "time_avg: window selects no samples");
  return view(s.y).mean();
}

}  // namespace ptkr
