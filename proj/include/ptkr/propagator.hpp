#pragma once

#include <Eigen/Core>

#include "ptkr/basis.hpp"
#include "ptkr/transform.hpp"
#include "ptkr/wave_state.hpp"

namespace ptkr {

// Guards against aliasing: the probability in the outer `fraction` of
// momentum indices (each side), relative to the total norm, must stay below
// `tolerance`.
struct TailGuard {
  double fraction = 0.1;
  double tolerance = 1e-8;
  bool enabled = true;

  static TailGuard disabled() { return {0.1, 1e-8, false}; }

  double tail_mass(const Eigen::VectorXcd& momentum_amplitudes) const;
  void check(const Eigen::VectorXcd& momentum_amplitudes) const;
};

// Split-step Floquet operator U = U_f U_K with
//   U_K = exp(-i K cos(theta)/hbar) exp(K lambda sin(theta)/hbar)   (angle space)
//   U_f = exp(-i p^2 / (2 hbar))                                     (momentum space)
// The adjoint direction applies U_f^dagger then U_K^dagger. The gain factor
// is real, so U_K^dagger only flips the phase.
//
// All in-place members take and return amplitudes in momentum representation.
class FloquetPropagator {
 public:
  FloquetPropagator(const BasisSpec& basis, const ModelParams& params, TailGuard guard = {});

  const BasisSpec& basis() const noexcept { return basis_; }
  const ModelParams& params() const noexcept { return params_; }
  const TailGuard& guard() const noexcept { return guard_; }
  const SpectralTransform& transform() const noexcept { return transform_; }

  void kick(Eigen::VectorXcd& amplitudes, Direction direction) const;
  void free(Eigen::VectorXcd& amplitudes, Direction direction) const;
  void step(Eigen::VectorXcd& amplitudes, Direction direction) const;

 private:
  BasisSpec basis_;
  ModelParams params_;
  TailGuard guard_;
  SpectralTransform transform_;
  Eigen::VectorXcd kick_forward_;
  Eigen::VectorXcd kick_adjoint_;
  Eigen::VectorXcd free_forward_;
};

struct Moments {
  double norm_squared = 0.0;
  double p_mean = 0.0;
  double p2 = 0.0;
  double p4 = 0.0;
};

struct Observables : Moments {
  Eigen::VectorXd momentum_density;
  Eigen::VectorXd angle_density;
};

// Gaussian (sigma/pi)^{1/4} exp(-sigma theta^2 / 2) sampled on [-pi, pi),
// renormalized to unit norm, returned in momentum representation.
WaveState gaussian_state(const BasisSpec& basis, double sigma);

WaveState apply_kick(const WaveState& state, const ModelParams& params, Direction direction,
                     const TailGuard& guard = {});
WaveState apply_free(const WaveState& state, const ModelParams& params, Direction direction);
WaveState floquet_step(const WaveState& state, const ModelParams& params, Direction direction,
                       const TailGuard& guard = {});

// psi_n -> p_n psi_n. The result is not renormalized; its norm is <p^2>.
// Throws ZeroStateError when the result vanishes.
WaveState apply_p(const WaveState& state);
void apply_p_inplace(Eigen::VectorXcd& momentum_amplitudes, const BasisSpec& basis);

// Moments on the normalized momentum density |psi_n|^2 / norm^2.
Moments moments(const Eigen::VectorXcd& momentum_amplitudes, const BasisSpec& basis);
Observables observables(const WaveState& state);

}  // namespace ptkr
