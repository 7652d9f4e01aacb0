#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "ptkr/basis.hpp"
#include "ptkr/fit.hpp"
#include "ptkr/propagator.hpp"

namespace ptkr {

// log N(t) of the freely growing state, t = 0..t_max. The state is rescaled
// to unit norm after every kick and the logs of the rescale factors are
// accumulated, so N(t) never has to be representable.
struct NormSeries {
  ModelParams params;
  std::vector<double> log_norm;
  std::optional<int> overflow_at;  // set when evolution stopped on a grid overflow

  int t_max() const noexcept { return static_cast<int>(log_norm.size()) - 1; }
  Eigen::VectorXd times() const;
  Eigen::Map<const Eigen::VectorXd> values() const {
    return {log_norm.data(), static_cast<Eigen::Index>(log_norm.size())};
  }
};

NormSeries norm_series(const ModelParams& params, const BasisSpec& basis, double sigma, int t_max,
                       const TailGuard& guard = {}, bool truncate_on_overflow = false);

struct GrowthFit {
  double mu = 0.0;  // log-norm per kick
  double r_squared = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  Eigen::Index points = 0;
};

inline constexpr Eigen::Index kMinGrowthWindow = 10;

// Default window: the last half of the series.
TimeWindow default_growth_window(const NormSeries& series);
GrowthFit fit_growth_rate(const NormSeries& series, std::optional<TimeWindow> window = {});

// log of the arithmetic mean of N(t) over the window, via log-sum-exp.
double mean_log_norm(const NormSeries& series, std::optional<TimeWindow> window = {});

enum class PhaseLabel { unbroken, broken };

const char* to_string(PhaseLabel label);

struct ClassifierOptions {
  int n_modes = 8192;
  double sigma = 10.0;
  int t_max = 2000;
  double mu_threshold = 1e-4;
  double r2_min = 0.5;
  int t_max_limit = 8000;  // find_lambda_c doubles t_max up to here on ambiguous fits
  TailGuard guard{};
};

struct Classification {
  PhaseLabel label = PhaseLabel::unbroken;
  double mu = 0.0;
  double r_squared = 0.0;
  double mean_log_norm = 0.0;  // log of the mean N(t) over the growth window
  int t_max_used = 0;
  bool inconclusive = false;  // grid overflow; mu comes from the truncated series
  std::string note;
};

// broken <=> mu > threshold and r^2 > r2_min.
Classification classify_point(const ModelParams& params, const BasisSpec& basis, double sigma,
                              int t_max, double mu_threshold, double r2_min = 0.5,
                              const TailGuard& guard = {});

struct LambdaCResult {
  double lambda_c = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int evaluations = 0;
};

LambdaCResult find_lambda_c(double kick_strength, double hbar_eff, double lambda_lo,
                            double lambda_hi, double tol, const ClassifierOptions& options = {});

struct PhaseCell {
  double kick_strength = 0.0;
  double non_hermiticity = 0.0;
  Classification classification;
};

struct PhaseDiagram {
  std::vector<double> kick_axis;
  std::vector<double> lambda_axis;
  double hbar_eff = 1.0;
  double mu_threshold = 0.0;
  double r2_min = 0.0;
  int t_max = 0;
  std::vector<PhaseCell> cells;  // K-major: cells[iK * lambda_axis.size() + iL]

  const PhaseCell& cell(std::size_t ik, std::size_t il) const {
    return cells.at(ik * lambda_axis.size() + il);
  }
  // First broken lambda of column ik, if any.
  std::optional<double> boundary(std::size_t ik) const;
};

PhaseDiagram scan_diagram(const std::vector<double>& kick_axis,
                          const std::vector<double>& lambda_axis, double hbar_eff,
                          const ClassifierOptions& options = {}, int threads = 1);

}  // namespace ptkr
