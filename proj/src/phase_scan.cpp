#include "ptkr/phase_scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "ptkr/errors.hpp"

namespace ptkr {

Eigen::VectorXd NormSeries::times() const {
  return Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(log_norm.size()), 0.0,
                                    static_cast<double>(t_max()));
}

NormSeries norm_series(const ModelParams& params, const BasisSpec& basis, double sigma, int t_max,
                       const TailGuard& guard, bool truncate_on_overflow) {
  if (t_max < kMinGrowthWindow) throw InvalidArgument("norm_series: t_max must be >= 10");
  const FloquetPropagator prop(basis, params, guard);
  Eigen::VectorXcd amps = gaussian_state(basis, sigma).amplitudes();
  NormSeries out{params, {}, std::nullopt};
  out.log_norm.reserve(t_max + 1);
  out.log_norm.push_back(0.0);
  double log_norm = 0.0;
  for (int t = 1; t <= t_max; ++t) {
    try {
      prop.step(amps, Direction::forward);
    } catch (const GridOverflowError&) {
      if (!truncate_on_overflow) throw;
      out.overflow_at = t;
      break;
    }
    const double n2 = amps.squaredNorm();
    log_norm += std::log(n2);
    amps /= std::sqrt(n2);
    out.log_norm.push_back(log_norm);
  }
  return out;
}

TimeWindow default_growth_window(const NormSeries& series) {
  const int t_max = series.t_max();
  return {static_cast<double>(t_max / 2), static_cast<double>(t_max)};
}

GrowthFit fit_growth_rate(const NormSeries& series, std::optional<TimeWindow> window) {
  const TimeWindow w = window.value_or(default_growth_window(series));
  std::vector<double> t;
  std::vector<double> y;
  for (int i = 0; i <= series.t_max(); ++i) {
    if (w.contains(i)) {
      t.push_back(i);
      y.push_back(series.log_norm[i]);
    }
  }
  if (static_cast<Eigen::Index>(t.size()) < kMinGrowthWindow) {
    throw FitError("window_too_short", "growth fit window needs at least 10 samples");
  }
  const Eigen::Map<const Eigen::VectorXd> tv(t.data(), static_cast<Eigen::Index>(t.size()));
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const LinearFit line = least_squares(tv, yv);
  return {line.slope, line.r_squared, t.front(), t.back(), line.points};
}

double mean_log_norm(const NormSeries& series, std::optional<TimeWindow> window) {
  const TimeWindow w = window.value_or(default_growth_window(series));
  double peak = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  for (int i = 0; i <= series.t_max(); ++i) {
    if (w.contains(i)) {
      peak = std::max(peak, series.log_norm[i]);
      ++count;
    }
  }
  if (count == 0) throw FitError("empty_window", "mean_log_norm: window selects no samples");
  double acc = 0.0;
  for (int i = 0; i <= series.t_max(); ++i) {
    if (w.contains(i)) acc += std::exp(series.log_norm[i] - peak);
  }
  return peak + std::log(acc) - std::log(static_cast<double>(count));
}

const char* to_string(PhaseLabel label) {
  return label == PhaseLabel::broken ? "broken" : "unbroken";
}

Classification classify_point(const ModelParams& params, const BasisSpec& basis, double sigma,
                              int t_max, double mu_threshold, double r2_min,
                              const TailGuard& guard) {
  const NormSeries series = norm_series(params, basis, sigma, t_max, guard, true);
  Classification c;
  c.t_max_used = series.t_max();
  if (series.overflow_at) {
    c.inconclusive = true;
    c.note = "grid overflow at t=" + std::to_string(*series.overflow_at) + "; enlarge the basis";
    if (series.t_max() + 1 < 2 * kMinGrowthWindow) {
      c.mu = std::numeric_limits<double>::quiet_NaN();
      c.r_squared = std::numeric_limits<double>::quiet_NaN();
      c.mean_log_norm = std::numeric_limits<double>::quiet_NaN();
      return c;
    }
  }
  const GrowthFit fit = fit_growth_rate(series);
  c.mu = fit.mu;
  c.r_squared = fit.r_squared;
  c.mean_log_norm = mean_log_norm(series);
  c.label = (fit.mu > mu_threshold && fit.r_squared > r2_min) ? PhaseLabel::broken
                                                              : PhaseLabel::unbroken;
  return c;
}

namespace {

// Ambiguous fits (growing but noisy) are retried with doubled horizons.
Classification classify_adaptive(double kick, double hbar, double lambda,
                                 const ClassifierOptions& o) {
  const BasisSpec basis(o.n_modes, hbar);
  const ModelParams params{kick, lambda, hbar};
  int t_max = o.t_max;
  Classification c = classify_point(params, basis, o.sigma, t_max, o.mu_threshold, o.r2_min, o.guard);
  while (!c.inconclusive && c.r_squared < o.r2_min && c.mu > o.mu_threshold &&
         2 * t_max <= o.t_max_limit) {
    t_max *= 2;
    c = classify_point(params, basis, o.sigma, t_max, o.mu_threshold, o.r2_min, o.guard);
  }
  return c;
}

}  // namespace

LambdaCResult find_lambda_c(double kick_strength, double hbar_eff, double lambda_lo,
                            double lambda_hi, double tol, const ClassifierOptions& options) {
  if (!(tol > 0.0)) throw InvalidArgument("find_lambda_c: tol must be positive");
  if (!(lambda_lo >= 0.0) || !(lambda_hi > lambda_lo)) {
    throw BracketError("find_lambda_c: need 0 <= lambda_lo < lambda_hi");
  }
  LambdaCResult r{0.0, lambda_lo, lambda_hi, 0};
  const Classification at_lo = classify_adaptive(kick_strength, hbar_eff, lambda_lo, options);
  const Classification at_hi = classify_adaptive(kick_strength, hbar_eff, lambda_hi, options);
  r.evaluations = 2;
  if (at_lo.label != PhaseLabel::unbroken) {
    throw BracketError("find_lambda_c: lambda_lo=" + std::to_string(lambda_lo) +
                       " is not in the unbroken phase (mu=" + std::to_string(at_lo.mu) + ")");
  }
  if (at_hi.label != PhaseLabel::broken) {
    throw BracketError("find_lambda_c: lambda_hi=" + std::to_string(lambda_hi) +
                       " is not in the broken phase (mu=" + std::to_string(at_hi.mu) + ")");
  }
  while (r.bracket_hi - r.bracket_lo > tol) {
    const double mid = 0.5 * (r.bracket_lo + r.bracket_hi);
    const Classification c = classify_adaptive(kick_strength, hbar_eff, mid, options);
    ++r.evaluations;
    (c.label == PhaseLabel::broken ? r.bracket_hi : r.bracket_lo) = mid;
  }
  r.lambda_c = 0.5 * (r.bracket_lo + r.bracket_hi);
  return r;
}

std::optional<double> PhaseDiagram::boundary(std::size_t ik) const {
  for (std::size_t il = 0; il < lambda_axis.size(); ++il) {
    if (cell(ik, il).classification.label == PhaseLabel::broken) return lambda_axis[il];
  }
  return std::nullopt;
}

PhaseDiagram scan_diagram(const std::vector<double>& kick_axis,
                          const std::vector<double>& lambda_axis, double hbar_eff,
                          const ClassifierOptions& options, int threads) {
  if (kick_axis.empty() || lambda_axis.empty()) throw InvalidArgument("scan_diagram: empty axis");
  if (!std::is_sorted(kick_axis.begin(), kick_axis.end()) ||
      !std::is_sorted(lambda_axis.begin(), lambda_axis.end())) {
    throw InvalidArgument("scan_diagram: axes must be sorted");
  }
  PhaseDiagram d{kick_axis, lambda_axis,     hbar_eff, options.mu_threshold,
                 options.r2_min, options.t_max, {}};
  const std::size_t count = kick_axis.size() * lambda_axis.size();
  d.cells.resize(count);
  const BasisSpec basis(options.n_modes, hbar_eff);

  auto evaluate = [&](std::size_t idx) {
    const double kick = kick_axis[idx / lambda_axis.size()];
    const double lambda = lambda_axis[idx % lambda_axis.size()];
    PhaseCell& cell = d.cells[idx];
    cell.kick_strength = kick;
    cell.non_hermiticity = lambda;
    cell.classification = classify_point({kick, lambda, hbar_eff}, basis, options.sigma,
                                         options.t_max, options.mu_threshold, options.r2_min,
                                         options.guard);
  };

  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) evaluate(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) evaluate(i);
      });
    }
  }
  return d;
}

}  // namespace ptkr
