#include "ptkr/propagator.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "ptkr/errors.hpp"

namespace ptkr {

namespace {

constexpr double kZeroStateThreshold = 1e-300;

void require_matching_hbar(const BasisSpec& basis, const ModelParams& params) {
  params.validate();
  if (basis.hbar_eff() != params.hbar_eff) {
    throw InvalidArgument("basis and model disagree on hbar_eff");
  }
}

}  // namespace

WaveState WaveState::in_momentum() const {
  if (rep_ == Representation::momentum) return *this;
  WaveState out = *this;
  SpectralTransform(basis_.n_modes()).to_momentum(out.amplitudes_);
  out.rep_ = Representation::momentum;
  return out;
}

WaveState WaveState::in_angle() const {
  if (rep_ == Representation::angle) return *this;
  WaveState out = *this;
  SpectralTransform(basis_.n_modes()).to_angle(out.amplitudes_);
  out.rep_ = Representation::angle;
  return out;
}

std::complex<double> WaveState::inner(const WaveState& other) const {
  if (!(basis_ == other.basis_)) throw InvalidArgument("inner product across different bases");
  const WaveState a = in_momentum();
  const WaveState b = other.in_momentum();
  return a.amplitudes_.dot(b.amplitudes_);
}

double TailGuard::tail_mass(const Eigen::VectorXcd& amps) const {
  const auto n = amps.size();
  const auto band = static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(n)));
  if (band <= 0) return 0.0;
  const double total = amps.squaredNorm();
  if (!(total > 0.0)) return 0.0;
  const double tail = amps.head(band).squaredNorm() + amps.tail(band).squaredNorm();
  return tail / total;
}

void TailGuard::check(const Eigen::VectorXcd& amps) const {
  if (!enabled) return;
  const double mass = tail_mass(amps);
  if (!(mass < tolerance)) {
    std::ostringstream msg;
    msg << "tail mass " << mass << " in the outer " << fraction
        << " of momentum indices exceeds " << tolerance << " (grid of " << amps.size()
        << " modes is too small)";
    throw GridOverflowError(msg.str(), mass);
  }
}

FloquetPropagator::FloquetPropagator(const BasisSpec& basis, const ModelParams& params,
                                     TailGuard guard)
    : basis_(basis), params_(params), guard_(guard), transform_(basis.n_modes()) {
  require_matching_hbar(basis, params);
  const auto n = basis.size();
  const double k_over_hbar = params.kick_strength / params.hbar_eff;
  const double gain_scale = k_over_hbar * params.non_hermiticity;
  kick_forward_.resize(n);
  kick_adjoint_.resize(n);
  free_forward_.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double theta = basis.angle_at(j);
    const double gain = std::exp(gain_scale * std::sin(theta));
    const double phase = k_over_hbar * std::cos(theta);
    kick_forward_(j) = std::polar(gain, -phase);
    kick_adjoint_(j) = std::polar(gain, phase);
  }
  // p^2 / (2 hbar) = n^2 hbar / 2 reaches ~1e9 rad on large grids; reduce it
  // modulo 2 pi in extended precision before rounding to double.
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  for (Eigen::Index k = 0; k < n; ++k) {
    const long long index = basis.index_at(k);
    const long double phase = std::fmod(0.5L * static_cast<long double>(index * index) *
                                            static_cast<long double>(params.hbar_eff),
                                        two_pi);
    free_forward_(k) = std::polar(1.0, -static_cast<double>(phase));
  }
}

void FloquetPropagator::kick(Eigen::VectorXcd& amps, Direction direction) const {
  transform_.to_angle(amps);
  amps.array() *= (direction == Direction::forward ? kick_forward_ : kick_adjoint_).array();
  transform_.to_momentum(amps);
  guard_.check(amps);
}

void FloquetPropagator::free(Eigen::VectorXcd& amps, Direction direction) const {
  if (direction == Direction::forward) {
    amps.array() *= free_forward_.array();
  } else {
    amps.array() *= free_forward_.array().conjugate();
  }
}

void FloquetPropagator::step(Eigen::VectorXcd& amps, Direction direction) const {
  if (direction == Direction::forward) {
    kick(amps, direction);
    free(amps, direction);
  } else {
    free(amps, direction);
    kick(amps, direction);
  }
}

WaveState gaussian_state(const BasisSpec& basis, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("sigma must be positive");
  Eigen::VectorXcd amps(basis.size());
  for (Eigen::Index j = 0; j < basis.size(); ++j) {
    const double theta = basis.angle_at(j);
    amps(j) = std::exp(-0.5 * sigma * theta * theta);
  }
  amps /= amps.norm();
  WaveState angle_state(basis, std::move(amps), Representation::angle);
  return angle_state.in_momentum();
}

WaveState apply_kick(const WaveState& state, const ModelParams& params, Direction direction,
                     const TailGuard& guard) {
  FloquetPropagator prop(state.basis(), params, guard);
  WaveState out = state.in_momentum();
  prop.kick(out.amplitudes(), direction);
  return out;
}

WaveState apply_free(const WaveState& state, const ModelParams& params, Direction direction) {
  FloquetPropagator prop(state.basis(), params, TailGuard::disabled());
  WaveState out = state.in_momentum();
  prop.free(out.amplitudes(), direction);
  return out;
}

WaveState floquet_step(const WaveState& state, const ModelParams& params, Direction direction,
                       const TailGuard& guard) {
  FloquetPropagator prop(state.basis(), params, guard);
  WaveState out = state.in_momentum();
  prop.step(out.amplitudes(), direction);
  return out;
}

void apply_p_inplace(Eigen::VectorXcd& amps, const BasisSpec& basis) {
  for (Eigen::Index k = 0; k < amps.size(); ++k) amps(k) *= basis.momentum_at(k);
  if (!(amps.squaredNorm() >= kZeroStateThreshold)) {
    throw ZeroStateError("p annihilates the state (norm below 1e-300)");
  }
}

WaveState apply_p(const WaveState& state) {
  WaveState out = state.in_momentum();
  apply_p_inplace(out.amplitudes(), out.basis());
  return out;
}

Moments moments(const Eigen::VectorXcd& amps, const BasisSpec& basis) {
  Moments m;
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s4 = 0.0;
  for (Eigen::Index k = 0; k < amps.size(); ++k) {
    const double w = std::norm(amps(k));
    const double p = basis.momentum_at(k);
    const double p2 = p * p;
    s0 += w;
    s1 += w * p;
    s2 += w * p2;
    s4 += w * p2 * p2;
  }
  m.norm_squared = s0;
  if (s0 > 0.0) {
    m.p_mean = s1 / s0;
    m.p2 = s2 / s0;
    m.p4 = s4 / s0;
  }
  return m;
}

Observables observables(const WaveState& state) {
  const WaveState mom = state.in_momentum();
  Observables obs;
  static_cast<Moments&>(obs) = moments(mom.amplitudes(), mom.basis());
  const double norm2 = obs.norm_squared;
  obs.momentum_density = mom.amplitudes().cwiseAbs2();
  const WaveState ang = state.in_angle();
  obs.angle_density = ang.amplitudes().cwiseAbs2();
  if (norm2 > 0.0) {
    obs.momentum_density /= norm2;
    obs.angle_density /= ang.norm_squared();
  }
  return obs;
}

}  // namespace ptkr
