#pragma once

#include <Eigen/Core>

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ptkr/basis.hpp"
#include "ptkr/propagator.hpp"
#include "ptkr/wave_state.hpp"

namespace ptkr {

struct TrajectoryOptions {
  // Keep every k-th forward state; gaps are recomputed from the previous
  // checkpoint on demand. 1 stores the whole trajectory.
  int checkpoint_stride = 1;
  // Times that are always stored regardless of the stride.
  std::vector<int> retain;
  TailGuard guard{};
  // On grid overflow, stop at the last good step instead of throwing.
  bool truncate_on_overflow = false;
};

// Forward leg of the OTOC protocol for both branches, psi(t) = U^t psi0 and
// phi(t) = U^t p psi0. After every Floquet step each branch is rescaled back
// to the norm it started with.
class ForwardTrajectory {
 public:
  ForwardTrajectory(const ModelParams& params, const BasisSpec& basis, double sigma, int t_max,
                    TrajectoryOptions options = {});

  const ModelParams& params() const noexcept { return propagator_.params(); }
  const BasisSpec& basis() const noexcept { return propagator_.basis(); }
  const FloquetPropagator& propagator() const noexcept { return propagator_; }
  double sigma() const noexcept { return sigma_; }

  // Last time reached. Equals the requested t_max unless the evolution was
  // truncated by a grid overflow.
  int t_max() const noexcept { return t_max_; }
  std::optional<int> overflow_at() const noexcept { return overflow_at_; }
  const std::string& overflow_reason() const noexcept { return overflow_reason_; }

  // Squared norms at t = 0, restored after every step.
  double psi_norm0() const noexcept { return psi_norm0_; }
  double phi_norm0() const noexcept { return phi_norm0_; }

  WaveState psi(int t) const;
  WaveState phi(int t) const;

  // Norm ratio |U x|^2 / |x|^2 before forcing, one entry per step (entry t-1
  // belongs to the step t-1 -> t).
  const std::vector<double>& psi_growth() const noexcept { return psi_growth_; }
  const std::vector<double>& phi_growth() const noexcept { return phi_growth_; }

  // Moments of psi(t), t = 0..t_max.
  const std::vector<Moments>& psi_moments() const noexcept { return psi_moments_; }

  std::size_t stored_states() const noexcept { return stored_.size(); }

 private:
  struct Checkpoint {
    Eigen::VectorXcd psi;
    Eigen::VectorXcd phi;
  };

  // One forced-norm forward step; returns the raw growth factor.
  double advance(Eigen::VectorXcd& amps, double norm0) const;
  const Checkpoint& nearest_checkpoint(int t, int& at) const;
  Eigen::VectorXcd reconstruct(int t, bool phi_branch) const;

  FloquetPropagator propagator_;
  double sigma_;
  int t_max_ = 0;
  std::optional<int> overflow_at_;
  std::string overflow_reason_;
  double psi_norm0_ = 0.0;
  double phi_norm0_ = 0.0;
  std::map<int, Checkpoint> stored_;
  std::vector<double> psi_growth_;
  std::vector<double> phi_growth_;
  std::vector<Moments> psi_moments_;
};

ForwardTrajectory build_forward_trajectory(const ModelParams& params, const BasisSpec& basis,
                                           double sigma, int t_max,
                                           TrajectoryOptions options = {});

struct BackwardOptions {
  // false runs the diagnostic echo: no p insertion, plain forced-norm reversal.
  bool insert_p = true;
  // Physical times t (0 <= t <= t_n) at which the reversed psi branch is copied out.
  std::vector<int> capture_times;
  // false skips the phi branch: phi_R is left at its starting state and
  // phi_series is empty. Enough for reversal diagnostics, not for an OTOC.
  bool reverse_phi = true;
};

struct BackwardRecord {
  int steps = 0;          // adjoint steps applied so far
  int time = 0;           // physical time t_n - steps of the reversed state
  int doubled_time = 0;   // t_n + steps, the continuous forward/backward axis
  double norm_squared = 0.0;
  double log_norm = 0.0;  // accumulated log of the unforced norm ratios
  double p_mean = 0.0;
  double p2 = 0.0;
};

struct BackwardResult {
  int t_n = 0;
  WaveState psi_R;  // psi_R(t_0)
  WaveState phi_R;  // phi_R(t_0)
  double psi_R_norm = 0.0;  // forced squared norm N_{psi_R}
  double phi_R_norm = 0.0;  // forced squared norm N_{phi_R}
  std::vector<BackwardRecord> psi_series;  // steps = 0..t_n
  std::vector<BackwardRecord> phi_series;
  std::map<int, WaveState> psi_snapshots;  // keyed by physical time
};

BackwardResult backward_pass(const ForwardTrajectory& trajectory, int t_n,
                             BackwardOptions options = {});

struct OtocPoint {
  int t_n = 0;
  double c1 = 0.0;
  double c2 = 0.0;
  std::complex<double> c3{};
  double c = 0.0;

  static OtocPoint from_parts(int t_n, double c1, double c2, std::complex<double> c3) {
    return {t_n, c1, c2, c3, c1 + c2 - 2.0 * c3.real()};
  }
};

OtocPoint otoc_point(const BackwardResult& reversed);
OtocPoint otoc_point(const ForwardTrajectory& trajectory, int t_n);

struct OtocDiagnostics {
  double p2_R_t0 = 0.0;        // <p^2(t_0)>_R on the normalized psi_R(t_0)
  double norm_psi_R_t0 = 0.0;  // N_{psi_R}(t_0)
  double norm_phi_R_t0 = 0.0;  // N_{phi_R}(t_0)
};

struct OtocSample {
  int t_n = 0;
  std::optional<OtocPoint> point;
  OtocDiagnostics diagnostics;
  std::string failure;  // empty when point is present
};

struct OtocSeries {
  ModelParams params;
  BasisSpec basis;
  double sigma = 0.0;
  std::vector<OtocSample> samples;
  std::vector<Moments> forward_moments;  // psi branch, t = 0..last completed step

  std::vector<int> sample_times() const;
};

struct SeriesOptions {
  TailGuard guard{};
  int checkpoint_stride = 0;  // 0 keeps only the sample times
  int threads = 1;
};

OtocSeries otoc_series(const ModelParams& params, const BasisSpec& basis, double sigma,
                       const std::vector<int>& sample_times, const SeriesOptions& options = {});

// `count` distinct log-spaced integers in [1, t_max] (fewer when they collide),
// optionally preceded by 0.
std::vector<int> log_sample_times(int t_max, int count, bool include_zero = true);
std::vector<int> linear_sample_times(int t_max, int count, bool include_zero = true);

struct ReversalPoint {
  int t_j = 0;
  int doubled_time = 0;  // 2 t_n - t_j
  double p2_forward = 0.0;
  double p2_backward = 0.0;
  double ratio = 0.0;
};

// R(t_j) = <p^2(2 t_n - t_j)>_R / <p^2(t_j)>, j = 0..n, from normalized
// expectations on both legs.
std::vector<ReversalPoint> reversal_ratio_series(const ForwardTrajectory& trajectory,
                                                 const BackwardResult& reversed);
std::vector<ReversalPoint> reversal_ratio_series(const ForwardTrajectory& trajectory, int t_n,
                                                 BackwardOptions options = {});

// Small-basis reference built from explicit matrices (no FFT): the kick
// matrix comes from a fine trapezoidal quadrature of exp(-i V/hbar), folded
// onto the N-point grid.
namespace dense {

Eigen::MatrixXcd kick_matrix(const ModelParams& params, int n_modes, Direction direction);
Eigen::MatrixXcd free_matrix(const ModelParams& params, int n_modes, Direction direction);
Eigen::MatrixXcd floquet_matrix(const ModelParams& params, int n_modes, Direction direction);
Eigen::VectorXcd gaussian(int n_modes, double sigma);

}  // namespace dense

inline constexpr int kDenseOracleMaxModes = 16;

OtocPoint dense_oracle_otoc(const ModelParams& params, int n_modes, double sigma, int t_n);

}  // namespace ptkr
