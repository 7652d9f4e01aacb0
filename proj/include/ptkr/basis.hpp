#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>

#include "ptkr/errors.hpp"

namespace ptkr {

// Momentum grid of the rotor: indices n = -N/2 .. N/2-1 stored at vector
// position k = n + N/2, eigenvalues p_n = n*hbar. The conjugate angle grid is
// theta_j = -pi + 2*pi*j/N.
class BasisSpec {
 public:
  BasisSpec(int n_modes, double hbar_eff) : n_modes_(n_modes), hbar_(hbar_eff) {
    if (n_modes < 4 || n_modes % 2 != 0) {
      throw InvalidArgument("basis.n_modes must be even and >= 4, got " + std::to_string(n_modes));
    }
    if (!(hbar_eff > 0.0) || !std::isfinite(hbar_eff)) {
      throw InvalidArgument("basis hbar_eff must be positive and finite");
    }
  }

  int n_modes() const noexcept { return n_modes_; }
  double hbar_eff() const noexcept { return hbar_; }
  Eigen::Index size() const noexcept { return n_modes_; }

  int min_index() const noexcept { return -n_modes_ / 2; }
  int max_index() const noexcept { return n_modes_ / 2 - 1; }

  int index_at(Eigen::Index k) const noexcept { return static_cast<int>(k) - n_modes_ / 2; }
  Eigen::Index position_of(int n) const noexcept { return n + n_modes_ / 2; }

  double momentum_at(Eigen::Index k) const noexcept { return index_at(k) * hbar_; }
  double angle_at(Eigen::Index j) const noexcept {
    return -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(j) / n_modes_;
  }

  Eigen::VectorXd momenta() const {
    return Eigen::VectorXd::NullaryExpr(size(), [this](Eigen::Index k) { return momentum_at(k); });
  }
  Eigen::VectorXd angles() const {
    return Eigen::VectorXd::NullaryExpr(size(), [this](Eigen::Index j) { return angle_at(j); });
  }

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;

 private:
  int n_modes_;
  double hbar_;
};

// (K, lambda, hbar) of one kicked-rotor instance with kicking potential
// V(theta) = K [cos(theta) + i lambda sin(theta)].
struct ModelParams {
  double kick_strength = 0.0;
  double non_hermiticity = 0.0;
  double hbar_eff = 1.0;

  void validate() const {
    if (!std::isfinite(kick_strength)) throw InvalidArgument("model.kick_strength must be finite");
    if (!(non_hermiticity >= 0.0) || !std::isfinite(non_hermiticity)) {
      throw InvalidArgument("model.non_hermiticity must be non-negative");
    }
    if (!(hbar_eff > 0.0) || !std::isfinite(hbar_eff)) {
      throw InvalidArgument("model.hbar_eff must be positive");
    }
  }

  bool hermitian() const noexcept { return non_hermiticity == 0.0 || kick_strength == 0.0; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

enum class Direction { forward, adjoint };

}  // namespace ptkr
