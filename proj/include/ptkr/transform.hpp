#pragma once

#include <Eigen/Core>

#include <memory>

namespace ptkr {

// Unitary angle <-> momentum transform on an N-point grid,
//
//   psi(theta_j) = N^{-1/2} sum_n psi_n exp(i n theta_j),
//
// with the grid conventions of BasisSpec. Both directions preserve
// sum |.|^2. Instances are cheap to copy; the underlying FFT plans are
// shared per grid size and execution is safe from several threads at once.
class SpectralTransform {
 public:
  explicit SpectralTransform(int n_modes);

  int n_modes() const noexcept { return n_; }

  void to_angle(Eigen::VectorXcd& amplitudes) const;
  void to_momentum(Eigen::VectorXcd& amplitudes) const;

 private:
  struct Plans;

  int n_;
  std::shared_ptr<const Plans> plans_;
  // (-1)^n for momentum index n and (-1)^j for angle index j, folded with 1/sqrt(N).
  std::shared_ptr<const Eigen::VectorXd> momentum_sign_;
  std::shared_ptr<const Eigen::VectorXd> angle_sign_;
};

}  // namespace ptkr
