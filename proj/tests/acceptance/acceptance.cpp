// Acceptance gate: one PASS/FAIL line per criterion. With arguments, runs
// only the listed criterion numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ptkr/errors.hpp"
#include "ptkr/fit.hpp"
#include "ptkr/otoc.hpp"
#include "ptkr/phase_scan.hpp"
#include "ptkr/propagator.hpp"

namespace {

using namespace ptkr;

constexpr double kSigma = 10.0;

// Grids: the smallest power of two that keeps the tail guard (1e-8 in the
// outer 10%) quiet for the whole run.
constexpr int kDesk = 1 << 13;
constexpr int kLocalized = 1 << 14;  // L ~ 46 at hbar = 0.3 needs > 2^13 by t = 2500
constexpr int kBallistic = 1 << 17;  // <p> ~ 6.3 t reaches index ~2e4 at t = 1000

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Eigen::VectorXd vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct Columns {
  std::vector<double> t, c, c1, c2, re_c3, p2_R, norm_R;
  std::vector<int> failed;
};

Columns columns(const OtocSeries& s) {
  Columns out;
  for (const auto& x : s.samples) {
    if (!x.point) {
      out.failed.push_back(x.t_n);
      continue;
    }
    out.t.push_back(x.t_n);
    out.c.push_back(x.point->c);
    out.c1.push_back(x.point->c1);
    out.c2.push_back(x.point->c2);
    out.re_c3.push_back(x.point->c3.real());
    out.p2_R.push_back(x.diagnostics.p2_R_t0);
    out.norm_R.push_back(x.diagnostics.norm_psi_R_t0);
  }
  return out;
}

std::string failed_note(const Columns& c) {
  if (c.failed.empty()) return "";
  std::string s = "; guard-failed samples t_n =";
  for (int t : c.failed) s += " " + std::to_string(t);
  return s;
}

SeriesOptions series_options() {
  SeriesOptions o;
  o.threads = 1;
  return o;
}

// The localized series is shared by criteria 3 and 10.
const OtocSeries& localized_series() {
  static const OtocSeries s = otoc_series({6.0, 1e-5, 0.3}, BasisSpec(kLocalized, 0.3), kSigma,
                                          log_sample_times(2500, 40), series_options());
  return s;
}

Outcome hermitian_reversal() {
  const ModelParams params{6.0, 0.0, 0.3};
  const BasisSpec basis(kDesk, 0.3);
  TrajectoryOptions opts;
  opts.retain = {500};
  const ForwardTrajectory traj(params, basis, kSigma, 500, opts);
  const BackwardResult rev = backward_pass(traj, 500, {.insert_p = false});
  const WaveState psi0 = gaussian_state(basis, kSigma);
  const double overlap = std::abs(rev.psi_R.inner(psi0)) /
                         std::sqrt(rev.psi_R.norm_squared() * psi0.norm_squared());
  const double defect = 1.0 - overlap;
  return {defect <= 1e-9, "1 - fidelity = " + fmt("%.3g", defect) + " (need <= 1e-9)"};
}

Outcome oracle_equivalence() {
  const std::vector<ModelParams> sets{{1.0, 0.0, 1.0}, {1.0, 0.1, 1.0}, {2.0, 0.3, 0.5}};
  double worst = 0.0;
  std::string where;
  for (int n : {8, 16}) {
    for (const ModelParams& p : sets) {
      TrajectoryOptions opts;
      opts.guard = TailGuard::disabled();
      const ForwardTrajectory traj(p, BasisSpec(n, p.hbar_eff), kSigma, 5, opts);
      for (int t_n : {1, 2, 3, 5}) {
        const OtocPoint a = otoc_point(traj, t_n);
        const OtocPoint b = dense_oracle_otoc(p, n, kSigma, t_n);
        const double errs[] = {std::abs(a.c1 - b.c1) / std::abs(b.c1),
                               std::abs(a.c2 - b.c2) / std::abs(b.c2),
                               std::abs(a.c3 - b.c3) / std::abs(b.c3),
                               std::abs(a.c - b.c) / std::abs(b.c)};
        for (double e : errs) {
          if (!(e <= worst)) {
            worst = e;
            std::ostringstream w;
            w << "N=" << n << " K=" << p.kick_strength << " lambda=" << p.non_hermiticity
              << " hbar=" << p.hbar_eff << " t_n=" << t_n;
            where = w.str();
          }
        }
      }
    }
  }
  return {worst <= 1e-9, "max relative error " + fmt("%.3g", worst) + " at " + where + " (need <= 1e-9)"};
}

Outcome dl_saturation() {
  const Columns c = columns(localized_series());
  const FitResult f = fit_power_law(vec(c.t), vec(c.c), {500, 2500});
  return {std::abs(f.value) < 0.5,
          "eta over [500, 2500] = " + fmt("%.3f", f.value) + " (r2 " + fmt("%.3f", f.r_squared) +
              ", " + std::to_string(f.points) + " points; need |eta| < 0.5)" + failed_note(c)};
}

Outcome k_eight_law() {
  std::vector<int> times;
  for (int j = 0; j <= 10; ++j) times.push_back(1250 + 125 * j);
  std::vector<double> ks{4, 6, 8, 10, 12};
  std::vector<double> cbar;
  std::string table;
  for (double k : ks) {
    const OtocSeries s = otoc_series({k, 1e-5, 1.0}, BasisSpec(kDesk, 1.0), kSigma, times,
                                     series_options());
    const Columns c = columns(s);
    if (!c.failed.empty()) return {false, "K=" + fmt("%g", k) + failed_note(c)};
    cbar.push_back(time_avg(vec(c.t), vec(c.c), {1250, 2500}));
    table += " K=" + fmt("%g", k) + ":" + fmt("%.3g", cbar.back());
  }
  const FitResult f = k_scaling_exponent(vec(ks), vec(cbar));
  return {std::abs(f.value - 8.0) <= 1.0, "slope = " + fmt("%.3f", f.value) + " (r2 " +
                                              fmt("%.3f", f.r_squared) + "; need 8 +- 1);" + table};
}

Outcome quadratic_growth() {
  const OtocSeries s = otoc_series({6.0, 0.9, 0.3}, BasisSpec(kBallistic, 0.3), kSigma,
                                   log_sample_times(1000, 40), series_options());
  const Columns c = columns(s);
  const FitResult eta = fit_power_law(vec(c.t), vec(c.c), {100, 1000});
  std::vector<double> t, p2;
  for (std::size_t i = 0; i < s.forward_moments.size(); ++i) {
    t.push_back(static_cast<double>(i));
    p2.push_back(s.forward_moments[i].p2);
  }
  const FitResult gamma = fit_ballistic_rate(vec(t), vec(p2), BallisticMode::quadratic, {100, 1000});
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < c.t.size(); ++i) {
    if (c.t[i] < 100) continue;
    const double r = c.c1[i] / (c.t[i] * c.t[i]);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  const bool ok_eta = std::abs(eta.value - 2.0) <= 0.1;
  const bool ok_gamma = std::abs(gamma.value - 6.3) <= 0.63;
  const bool ok_c1 = lo >= 22.0 && hi <= 88.0;
  return {ok_eta && ok_gamma && ok_c1 && c.failed.empty(),
          "eta = " + fmt("%.3f", eta.value) + " (need 2 +- 0.1); gamma = " + fmt("%.3f", gamma.value) +
              " (need 6.3 +- 10%); c1/t^2 in [" + fmt("%.1f", lo) + ", " + fmt("%.1f", hi) +
              "] (need [22, 88])" + failed_note(c)};
}

Outcome super_quadratic_growth() {
  const OtocSeries s = otoc_series({6.0, 0.022, 0.3}, BasisSpec(kBallistic, 0.3), kSigma,
                                   log_sample_times(2500, 40), series_options());
  const Columns c = columns(s);
  const FitResult eta = fit_power_law(vec(c.t), vec(c.c), {100, 2500});
  const FitResult back = backward_growth_exponent(vec(c.t), vec(c.p2_R), {100, 2500});
  std::vector<double> t, p2;
  for (std::size_t i = 0; i < s.forward_moments.size(); ++i) {
    t.push_back(static_cast<double>(i));
    p2.push_back(s.forward_moments[i].p2);
  }
  const FitResult gamma = fit_ballistic_rate(vec(t), vec(p2), BallisticMode::quadratic, {100, 2500});
  const bool ok = std::abs(eta.value - 3.4) <= 0.4 && std::abs(back.value - 1.4) <= 0.3 &&
                  std::abs(gamma.value - 3.2) <= 0.15 * 3.2;
  return {ok, "eta = " + fmt("%.3f", eta.value) + " (need 3.4 +- 0.4); backward exponent = " +
                  fmt("%.3f", back.value) + " (need 1.4 +- 0.3); gamma = " + fmt("%.3f", gamma.value) +
                  " (need 3.2 +- 15%); fit points " + std::to_string(eta.points) + ", last t_n " +
                  fmt("%g", eta.window_hi) + failed_note(c)};
}

Outcome norm_growth() {
  const BasisSpec basis(kLocalized, 1.0);
  const NormSeries quiet = norm_series({5.0, 0.01, 1.0}, basis, kSigma, 1000);
  double worst = 0.0;
  for (double v : quiet.log_norm) worst = std::max(worst, std::abs(v));
  std::vector<double> lambdas{0.15, 0.2, 0.25, 0.3};
  std::vector<double> mus;
  bool increasing = true;
  std::string listing;
  for (double l : lambdas) {
    const GrowthFit g = fit_growth_rate(norm_series({5.0, l, 1.0}, basis, kSigma, 1000));
    if (!mus.empty() && !(g.mu > mus.back())) increasing = false;
    mus.push_back(g.mu);
    listing += " " + fmt("%.4f", g.mu);
  }
  const LinearFit line = least_squares(vec(lambdas), vec(mus));
  return {worst < 0.1 && increasing && line.r_squared > 0.9,
          "max |log N| at lambda=0.01 = " + fmt("%.4f", worst) + " (need < 0.1); mu =" + listing +
              (increasing ? " increasing" : " NOT increasing") + "; linear r2 = " +
              fmt("%.4f", line.r_squared) + " (need > 0.9)"};
}

Outcome lambda_c_estimate() {
  ClassifierOptions fine;
  fine.n_modes = kLocalized;
  const LambdaCResult main = find_lambda_c(6.0, 0.3, 1e-5, 0.02, 1e-4, fine);
  ClassifierOptions desk;
  desk.n_modes = kDesk;
  ClassifierOptions small_hbar;
  small_hbar.n_modes = 1 << 16;  // L ~ K^2 / hbar^2 in index units
  const double a = find_lambda_c(5.0, 1.0, 1e-5, 0.3, 1e-3, desk).lambda_c;
  const double b = find_lambda_c(5.0, 0.1, 1e-5, 0.05, 1e-5, small_hbar).lambda_c;
  const double c = find_lambda_c(8.0, 1.0, 1e-5, 0.3, 1e-3, desk).lambda_c;
  const double d = find_lambda_c(4.0, 1.0, 1e-5, 0.3, 1e-3, desk).lambda_c;
  const bool in_band = main.lambda_c >= 3e-4 && main.lambda_c <= 3e-3;
  return {in_band && a > b && c < d,
          "lambda_c(6, 0.3) = " + fmt("%.3g", main.lambda_c) + " (need [3e-4, 3e-3]); lambda_c(5, 1) = " +
              fmt("%.3g", a) + " > lambda_c(5, 0.1) = " + fmt("%.3g", b) + "; lambda_c(8, 1) = " +
              fmt("%.3g", c) + " < lambda_c(4, 1) = " + fmt("%.3g", d)};
}

Outcome localization_profile() {
  const ModelParams params{6.0, 1e-5, 0.3};
  const BasisSpec basis(kLocalized, 0.3);
  TrajectoryOptions opts;
  opts.retain = {2500};
  const ForwardTrajectory traj(params, basis, kSigma, 2500, opts);
  const BackwardResult rev = backward_pass(traj, 2500);
  const Eigen::VectorXd fwd = observables(traj.psi(2500)).momentum_density;
  const Eigen::VectorXd back = observables(rev.psi_R).momentum_density;
  const FitResult lf = fit_localization_length(fwd, basis);
  const FitResult lb = fit_localization_length(back, basis);
  const double spread = std::abs(lf.value - lb.value) / std::min(lf.value, lb.value);
  return {std::abs(lf.value - 46.0) <= 0.3 * 46.0 && spread <= 0.2,
          "L(t_n) = " + fmt("%.2f", lf.value) + " (need 46 +- 30%); L(t_0, reversed) = " +
              fmt("%.2f", lb.value) + "; relative spread " + fmt("%.3f", spread) + " (need <= 0.2)"};
}

Outcome zero_and_dominance() {
  const OtocSeries& s = localized_series();
  double zero = NAN;
  double worst = INFINITY;
  for (const auto& x : s.samples) {
    if (!x.point) continue;
    if (x.t_n == 0) zero = std::abs(x.point->c) / x.point->c1;
    if (x.t_n >= 500) {
      worst = std::min(worst, x.point->c1 / std::max(x.point->c2, std::abs(x.point->c3.real())));
    }
  }
  return {zero <= 1e-10 && worst > 1e3, "|C(0)|/C1(0) = " + fmt("%.3g", zero) +
                                            " (need <= 1e-10); min c1/max(c2, |Re c3|) for t >= 500 = " +
                                            fmt("%.4g", worst) + " (need > 1e3)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "hermitian_reversal", 5, hermitian_reversal},
      {2, "oracle_equivalence", 10, oracle_equivalence},
      {3, "dl_saturation", 600, dl_saturation},
      {4, "k8_law", 1800, k_eight_law},
      {5, "qg_regime", 600, quadratic_growth},
      {6, "sqg_regime", 1800, super_quadratic_growth},
      {7, "norm_growth", 120, norm_growth},
      {8, "lambda_c", 1800, lambda_c_estimate},
      {9, "localization_profile", 600, localization_profile},
      {10, "zero_and_c1_dominance", 300, zero_and_dominance},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] %d %s: %s; runtime %.1f s (limit %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id,
                c.name, o.detail.c_str(), secs, c.limit_seconds, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
