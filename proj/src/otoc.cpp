#include "ptkr/otoc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <set>
#include <thread>

#include "ptkr/errors.hpp"

namespace ptkr {

namespace {

void force_norm(Eigen::VectorXcd& amps, double target_norm2, double current_norm2) {
  amps *= std::sqrt(target_norm2 / current_norm2);
}

double c1_of(const Eigen::VectorXcd& psi_R, const BasisSpec& basis) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < psi_R.size(); ++k) {
    const double p = basis.momentum_at(k);
    s += p * p * std::norm(psi_R(k));
  }
  return s;
}

std::complex<double> c3_of(const Eigen::VectorXcd& psi_R, const Eigen::VectorXcd& phi_R,
                           const BasisSpec& basis) {
  std::complex<double> s{};
  for (Eigen::Index k = 0; k < psi_R.size(); ++k) {
    s += std::conj(psi_R(k)) * basis.momentum_at(k) * phi_R(k);
  }
  return s;
}

}  // namespace

ForwardTrajectory::ForwardTrajectory(const ModelParams& params, const BasisSpec& basis,
                                     double sigma, int t_max, TrajectoryOptions options)
    : propagator_(basis, params, options.guard), sigma_(sigma) {
  if (t_max < 0) throw InvalidArgument("t_max must be non-negative");
  if (options.checkpoint_stride < 0) throw InvalidArgument("checkpoint stride must be >= 0");
  const std::set<int> retain(options.retain.begin(), options.retain.end());
  const int stride = options.checkpoint_stride;
  auto keep = [&](int t) { return t == 0 || (stride > 0 && t % stride == 0) || retain.count(t); };

  Eigen::VectorXcd psi = gaussian_state(basis, sigma).amplitudes();
  Eigen::VectorXcd phi = psi;
  apply_p_inplace(phi, basis);
  psi_norm0_ = psi.squaredNorm();
  phi_norm0_ = phi.squaredNorm();

  psi_growth_.reserve(t_max);
  phi_growth_.reserve(t_max);
  psi_moments_.reserve(t_max + 1);
  psi_moments_.push_back(moments(psi, basis));
  stored_.emplace(0, Checkpoint{psi, phi});

  for (int t = 1; t <= t_max; ++t) {
    try {
      const double gpsi = advance(psi, psi_norm0_);
      const double gphi = advance(phi, phi_norm0_);
      psi_growth_.push_back(gpsi);
      phi_growth_.push_back(gphi);
    } catch (const GridOverflowError& e) {
      if (!options.truncate_on_overflow) throw;
      overflow_at_ = t;
      overflow_reason_ = e.what();
      break;
    }
    psi_moments_.push_back(moments(psi, basis));
    t_max_ = t;
    if (keep(t)) stored_.emplace(t, Checkpoint{psi, phi});
  }
}

double ForwardTrajectory::advance(Eigen::VectorXcd& amps, double norm0) const {
  propagator_.step(amps, Direction::forward);
  const double norm2 = amps.squaredNorm();
  force_norm(amps, norm0, norm2);
  return norm2 / norm0;
}

const ForwardTrajectory::Checkpoint& ForwardTrajectory::nearest_checkpoint(int t, int& at) const {
  auto it = stored_.upper_bound(t);
  --it;  // stored_ always holds t = 0
  at = it->first;
  return it->second;
}

Eigen::VectorXcd ForwardTrajectory::reconstruct(int t, bool phi_branch) const {
  if (t < 0 || t > t_max_) throw InvalidArgument("time outside the forward trajectory");
  int at = 0;
  const Checkpoint& cp = nearest_checkpoint(t, at);
  Eigen::VectorXcd amps = phi_branch ? cp.phi : cp.psi;
  const double norm0 = phi_branch ? phi_norm0_ : psi_norm0_;
  for (int s = at; s < t; ++s) advance(amps, norm0);
  return amps;
}

WaveState ForwardTrajectory::psi(int t) const { return {basis(), reconstruct(t, false)}; }
WaveState ForwardTrajectory::phi(int t) const { return {basis(), reconstruct(t, true)}; }

ForwardTrajectory build_forward_trajectory(const ModelParams& params, const BasisSpec& basis,
                                           double sigma, int t_max, TrajectoryOptions options) {
  return ForwardTrajectory(params, basis, sigma, t_max, std::move(options));
}

namespace {

std::vector<BackwardRecord> reverse_branch(const FloquetPropagator& prop, Eigen::VectorXcd& amps,
                                           int t_n, const std::set<int>& capture,
                                           std::map<int, WaveState>* snapshots) {
  const BasisSpec& basis = prop.basis();
  const double start_norm = amps.squaredNorm();
  std::vector<BackwardRecord> series;
  series.reserve(t_n + 1);
  double log_norm = 0.0;
  auto record = [&](int s) {
    const Moments m = moments(amps, basis);
    series.push_back({s, t_n - s, t_n + s, m.norm_squared, log_norm, m.p_mean, m.p2});
    if (snapshots && capture.count(t_n - s)) snapshots->emplace(t_n - s, WaveState(basis, amps));
  };
  record(0);
  for (int s = 1; s <= t_n; ++s) {
    prop.step(amps, Direction::adjoint);
    const double norm2 = amps.squaredNorm();
    log_norm += std::log(norm2 / start_norm);
    force_norm(amps, start_norm, norm2);
    record(s);
  }
  return series;
}

}  // namespace

BackwardResult backward_pass(const ForwardTrajectory& trajectory, int t_n,
                             BackwardOptions options) {
  if (t_n < 0 || t_n > trajectory.t_max()) {
    throw InvalidArgument("t_n outside [0, t_max] of the forward trajectory");
  }
  const BasisSpec& basis = trajectory.basis();
  Eigen::VectorXcd psi = trajectory.psi(t_n).amplitudes();
  Eigen::VectorXcd phi = trajectory.phi(t_n).amplitudes();
  if (options.insert_p) {
    apply_p_inplace(psi, basis);
    apply_p_inplace(phi, basis);
  }
  const double psi_norm = psi.squaredNorm();
  const double phi_norm = phi.squaredNorm();
  for (int t : options.capture_times) {
    if (t < 0 || t > t_n) throw InvalidArgument("capture time outside [0, t_n]");
  }
  const std::set<int> capture(options.capture_times.begin(), options.capture_times.end());
  std::map<int, WaveState> snapshots;
  auto psi_series = reverse_branch(trajectory.propagator(), psi, t_n, capture, &snapshots);
  std::vector<BackwardRecord> phi_series;
  if (options.reverse_phi) phi_series = reverse_branch(trajectory.propagator(), phi, t_n, {}, nullptr);
  return BackwardResult{t_n,
                        WaveState(basis, std::move(psi)),
                        WaveState(basis, std::move(phi)),
                        psi_norm,
                        phi_norm,
                        std::move(psi_series),
                        std::move(phi_series),
                        std::move(snapshots)};
}

OtocPoint otoc_point(const BackwardResult& reversed) {
  if (reversed.phi_series.empty()) throw InvalidArgument("otoc_point: phi branch was not reversed");
  const BasisSpec& basis = reversed.psi_R.basis();
  const Eigen::VectorXcd& psi = reversed.psi_R.amplitudes();
  const Eigen::VectorXcd& phi = reversed.phi_R.amplitudes();
  return OtocPoint::from_parts(reversed.t_n, c1_of(psi, basis), phi.squaredNorm(),
                               c3_of(psi, phi, basis));
}

OtocPoint otoc_point(const ForwardTrajectory& trajectory, int t_n) {
  return otoc_point(backward_pass(trajectory, t_n));
}

std::vector<int> OtocSeries::sample_times() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.t_n);
  return out;
}

OtocSeries otoc_series(const ModelParams& params, const BasisSpec& basis, double sigma,
                       const std::vector<int>& sample_times, const SeriesOptions& options) {
  if (sample_times.empty()) throw InvalidArgument("otoc_series: no sample times");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < 0 || (i > 0 && sample_times[i] <= sample_times[i - 1])) {
      throw InvalidArgument("otoc_series: sample times must be non-negative and strictly increasing");
    }
  }
  TrajectoryOptions topts;
  topts.checkpoint_stride = options.checkpoint_stride;
  topts.retain = sample_times;
  topts.guard = options.guard;
  topts.truncate_on_overflow = true;
  const ForwardTrajectory traj(params, basis, sigma, sample_times.back(), topts);

  OtocSeries series{params, basis, sigma, {}, traj.psi_moments()};
  series.samples.resize(sample_times.size());

  auto evaluate = [&](std::size_t i) {
    OtocSample& out = series.samples[i];
    out.t_n = sample_times[i];
    if (out.t_n > traj.t_max()) {
      out.failure = "forward evolution stopped at t=" + std::to_string(traj.t_max()) + ": " +
                    traj.overflow_reason();
      return;
    }
    try {
      const BackwardResult rev = backward_pass(traj, out.t_n);
      out.point = otoc_point(rev);
      const Moments m = moments(rev.psi_R.amplitudes(), basis);
      out.diagnostics = {m.p2, rev.psi_R_norm, rev.phi_R_norm};
    } catch (const GridOverflowError& e) {
      out.failure = std::string("grid_overflow: ") + e.what();
    } catch (const ZeroStateError& e) {
      out.failure = std::string("zero_state: ") + e.what();
    }
  };

  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < sample_times.size(); ++i) evaluate(i);
  } else {
    // Largest t_n first so the long reversals do not trail at the end.
    std::atomic<std::size_t> next{0};
    const std::size_t count = sample_times.size();
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < count; k = next++) evaluate(count - 1 - k);
      });
    }
  }
  return series;
}

std::vector<int> log_sample_times(int t_max, int count, bool include_zero) {
  if (t_max < 1 || count < 1) throw InvalidArgument("log_sample_times: need t_max >= 1, count >= 1");
  std::vector<int> out;
  if (include_zero) out.push_back(0);
  const double top = std::log(static_cast<double>(t_max));
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 1.0 : static_cast<double>(i) / (count - 1);
    const int t = static_cast<int>(std::lround(std::exp(f * top)));
    if (out.empty() || t > out.back()) out.push_back(t);
  }
  if (out.back() != t_max) out.push_back(t_max);
  return out;
}

std::vector<int> linear_sample_times(int t_max, int count, bool include_zero) {
  if (t_max < 1 || count < 1) throw InvalidArgument("linear_sample_times: need t_max >= 1, count >= 1");
  std::vector<int> out;
  if (include_zero) out.push_back(0);
  for (int i = 1; i <= count; ++i) {
    const int t = static_cast<int>(std::lround(static_cast<double>(t_max) * i / count));
    if (t > 0 && (out.empty() || t > out.back())) out.push_back(t);
  }
  return out;
}

std::vector<ReversalPoint> reversal_ratio_series(const ForwardTrajectory& trajectory,
                                                 const BackwardResult& reversed) {
  const int t_n = reversed.t_n;
  std::vector<ReversalPoint> out;
  out.reserve(t_n + 1);
  for (int j = 0; j <= t_n; ++j) {
    // psi_R(t_j) sits t_n - j adjoint steps into the reversal.
    const BackwardRecord& back = reversed.psi_series.at(t_n - j);
    const double fwd = trajectory.psi_moments().at(j).p2;
    out.push_back({j, 2 * t_n - j, fwd, back.p2, back.p2 / fwd});
  }
  return out;
}

std::vector<ReversalPoint> reversal_ratio_series(const ForwardTrajectory& trajectory, int t_n,
                                                 BackwardOptions options) {
  options.reverse_phi = false;
  return reversal_ratio_series(trajectory, backward_pass(trajectory, t_n, options));
}

namespace dense {

namespace {

int index_of(int k, int n_modes) { return k - n_modes / 2; }

double angle(int j, int n) { return -std::numbers::pi + 2.0 * std::numbers::pi * j / n; }

}  // namespace

Eigen::MatrixXcd kick_matrix(const ModelParams& params, int n_modes, Direction direction) {
  params.validate();
  // Fourier coefficients of the kick factor on a 64x finer grid, folded
  // modulo N: the fold reproduces the N-point discrete model exactly.
  const int fine = 64 * n_modes;
  const double k_over_hbar = params.kick_strength / params.hbar_eff;
  const double sign = direction == Direction::forward ? -1.0 : 1.0;
  Eigen::VectorXcd samples(fine);
  for (int l = 0; l < fine; ++l) {
    const double th = angle(l, fine);
    samples(l) = std::exp(k_over_hbar * params.non_hermiticity * std::sin(th)) *
                 std::polar(1.0, sign * k_over_hbar * std::cos(th));
  }
  Eigen::VectorXcd folded = Eigen::VectorXcd::Zero(n_modes);
  for (int q = -fine / 2; q < fine / 2; ++q) {
    std::complex<double> coeff{};
    for (int l = 0; l < fine; ++l) coeff += samples(l) * std::polar(1.0, -q * angle(l, fine));
    coeff /= static_cast<double>(fine);
    const int bin = ((q % n_modes) + n_modes) % n_modes;
    folded(bin) += coeff;
  }
  Eigen::MatrixXcd m(n_modes, n_modes);
  for (int r = 0; r < n_modes; ++r) {
    for (int c = 0; c < n_modes; ++c) {
      const int d = index_of(r, n_modes) - index_of(c, n_modes);
      m(r, c) = folded(((d % n_modes) + n_modes) % n_modes);
    }
  }
  return m;
}

Eigen::MatrixXcd free_matrix(const ModelParams& params, int n_modes, Direction direction) {
  params.validate();
  Eigen::VectorXcd diag(n_modes);
  const double sign = direction == Direction::forward ? -1.0 : 1.0;
  for (int k = 0; k < n_modes; ++k) {
    const double p = index_of(k, n_modes) * params.hbar_eff;
    diag(k) = std::polar(1.0, sign * p * p / (2.0 * params.hbar_eff));
  }
  return diag.asDiagonal();
}

Eigen::MatrixXcd floquet_matrix(const ModelParams& params, int n_modes, Direction direction) {
  const Eigen::MatrixXcd uk = kick_matrix(params, n_modes, direction);
  const Eigen::MatrixXcd uf = free_matrix(params, n_modes, direction);
  return direction == Direction::forward ? Eigen::MatrixXcd(uf * uk) : Eigen::MatrixXcd(uk * uf);
}

Eigen::VectorXcd gaussian(int n_modes, double sigma) {
  Eigen::VectorXcd out(n_modes);
  for (int k = 0; k < n_modes; ++k) {
    std::complex<double> s{};
    for (int j = 0; j < n_modes; ++j) {
      const double th = angle(j, n_modes);
      s += std::exp(-0.5 * sigma * th * th) * std::polar(1.0, -index_of(k, n_modes) * th);
    }
    out(k) = s;
  }
  return out / out.norm();
}

}  // namespace dense

OtocPoint dense_oracle_otoc(const ModelParams& params, int n_modes, double sigma, int t_n) {
  if (n_modes > kDenseOracleMaxModes) {
    throw InvalidArgument("dense oracle supports at most 16 modes");
  }
  if (n_modes < 4 || n_modes % 2 != 0) throw InvalidArgument("dense oracle: n_modes must be even, >= 4");
  if (t_n < 0) throw InvalidArgument("dense oracle: t_n must be non-negative");
  const Eigen::MatrixXcd u = dense::floquet_matrix(params, n_modes, Direction::forward);
  const Eigen::MatrixXcd ud = dense::floquet_matrix(params, n_modes, Direction::adjoint);
  Eigen::VectorXd pvals(n_modes);
  for (int k = 0; k < n_modes; ++k) pvals(k) = (k - n_modes / 2) * params.hbar_eff;
  const auto p_op = pvals.asDiagonal();

  auto evolve = [](const Eigen::MatrixXcd& op, Eigen::VectorXcd v, int steps) {
    const double n0 = v.squaredNorm();
    for (int s = 0; s < steps; ++s) {
      v = (op * v).eval();
      v *= std::sqrt(n0 / v.squaredNorm());
    }
    return v;
  };

  const Eigen::VectorXcd psi0 = dense::gaussian(n_modes, sigma);
  const Eigen::VectorXcd phi0 = p_op * psi0;
  const Eigen::VectorXcd psi_tn = evolve(u, psi0, t_n);
  const Eigen::VectorXcd phi_tn = evolve(u, phi0, t_n);
  const Eigen::VectorXcd psi_R = evolve(ud, p_op * psi_tn, t_n);
  const Eigen::VectorXcd phi_R = evolve(ud, p_op * phi_tn, t_n);

  const Eigen::VectorXcd p_psi = p_op * psi_R;
  const double c1 = p_psi.squaredNorm();
  const double c2 = phi_R.squaredNorm();
  const std::complex<double> c3 = psi_R.dot(p_op * phi_R);
  return OtocPoint::from_parts(t_n, c1, c2, c3);
}

}  // namespace ptkr
