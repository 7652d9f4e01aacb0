#pragma once

#include <Eigen/Core>

#include <complex>

#include "ptkr/basis.hpp"

namespace ptkr {

enum class Representation { momentum, angle };

// Rotor state on a BasisSpec grid. Amplitudes are unnormalized; the norm is
// sum |psi|^2 in either representation.
class WaveState {
 public:
  WaveState(BasisSpec basis, Eigen::VectorXcd amplitudes,
            Representation rep = Representation::momentum)
      : basis_(basis), amplitudes_(std::move(amplitudes)), rep_(rep) {
    if (amplitudes_.size() != basis_.size()) {
      throw InvalidArgument("WaveState: amplitude length does not match basis");
    }
  }

  static WaveState momentum_eigenstate(const BasisSpec& basis, int n) {
    if (n < basis.min_index() || n > basis.max_index()) {
      throw InvalidArgument("momentum index outside basis");
    }
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(basis.size());
    amps(basis.position_of(n)) = 1.0;
    return {basis, std::move(amps)};
  }

  const BasisSpec& basis() const noexcept { return basis_; }
  Representation representation() const noexcept { return rep_; }
  const Eigen::VectorXcd& amplitudes() const noexcept { return amplitudes_; }
  Eigen::VectorXcd& amplitudes() noexcept { return amplitudes_; }

  double norm_squared() const { return amplitudes_.squaredNorm(); }

  WaveState in_momentum() const;
  WaveState in_angle() const;

  // <this|other>, both taken in momentum representation.
  std::complex<double> inner(const WaveState& other) const;

 private:
  BasisSpec basis_;
  Eigen::VectorXcd amplitudes_;
  Representation rep_;
};

}  // namespace ptkr
