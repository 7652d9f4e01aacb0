#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>

#include "ptkr/basis.hpp"

namespace ptkr {

// Closed interval on the abscissa (time, K, ...). Default: everything.
struct TimeWindow {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  bool unbounded() const noexcept { return std::isinf(lo) && lo < 0 && std::isinf(hi) && hi > 0; }
};

// Defaults when the caller pins nothing: power laws use [t_max/25, t_max],
// saturation averages the last half [t_max/2, t_max].
TimeWindow default_power_law_window(const Eigen::Ref<const Eigen::VectorXd>& t);
TimeWindow default_saturation_window(const Eigen::Ref<const Eigen::VectorXd>& t);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  Eigen::Index points = 0;
};

// Ordinary least squares y = slope * x + intercept. r^2 is clamped to
// [0, 1]; a constant y gives r^2 = 1.
LinearFit least_squares(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& y);

// Result of one scaling-law fit. `value` holds the exponent or rate; the
// window is the abscissa range actually used.
struct FitResult {
  double value = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  Eigen::Index points = 0;
};

inline constexpr Eigen::Index kMinPowerLawPoints = 8;

// y = prefactor * t^value, fitted as a line in (log t, log y).
FitResult fit_power_law(const Eigen::Ref<const Eigen::VectorXd>& t,
                        const Eigen::Ref<const Eigen::VectorXd>& y, TimeWindow window = {});

enum class LocalizationAxis { momentum, index };

struct LocalizationFitOptions {
  LocalizationAxis axis = LocalizationAxis::momentum;
  double floor = 1e-12;       // densities below are numerical noise
  double core_factor = 2.0;   // exclude |p| < core_factor * L0, L0 = sqrt(<p^2>/2)
  double min_decades = 3.0;
};

// L in |psi(p)|^2 ~ exp(-|p|/L); each side fitted separately, then averaged.
FitResult fit_localization_length(const Eigen::Ref<const Eigen::VectorXd>& density,
                                  const BasisSpec& basis, LocalizationFitOptions options = {});

enum class BallisticMode { quadratic, linear };

// quadratic: <p^2> = gamma^2 t^2 + c, gamma = sqrt(slope against t^2).
// linear:    <p>   = gamma t + c.
FitResult fit_ballistic_rate(const Eigen::Ref<const Eigen::VectorXd>& t,
                             const Eigen::Ref<const Eigen::VectorXd>& y, BallisticMode mode,
                             TimeWindow window = {});

FitResult k_scaling_exponent(const Eigen::Ref<const Eigen::VectorXd>& kick_strengths,
                             const Eigen::Ref<const Eigen::VectorXd>& saturated_otoc);

double time_avg(const Eigen::Ref<const Eigen::VectorXd>& t,
                const Eigen::Ref<const Eigen::VectorXd>& y, TimeWindow window = {});

inline FitResult backward_growth_exponent(const Eigen::Ref<const Eigen::VectorXd>& t_n,
                                          const Eigen::Ref<const Eigen::VectorXd>& p2_R_t0,
                                          TimeWindow window = {}) {
  return fit_power_law(t_n, p2_R_t0, window);
}

}  // namespace ptkr
