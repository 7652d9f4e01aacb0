#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

#include "gtest/gtest.h"

#include "ptkr/errors.hpp"
#include "ptkr/otoc.hpp"
#include "ptkr/propagator.hpp"
#include "ptkr/transform.hpp"

using namespace ptkr;

namespace {

using cd = std::complex<double>;

// psi(theta_j) = N^{-1/2} sum_n psi_n e^{i n theta_j}, summed term by term.
Eigen::VectorXcd direct_to_angle(const Eigen::VectorXcd& mom, const BasisSpec& b) {
  const auto n = b.size();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      out(j) += mom(k) * std::polar(1.0, b.index_at(k) * b.angle_at(j));
    }
  }
  return out / std::sqrt(static_cast<double>(n));
}

Eigen::VectorXcd direct_to_momentum(const Eigen::VectorXcd& ang, const BasisSpec& b) {
  const auto n = b.size();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out(k) += ang(j) * std::polar(1.0, -b.index_at(k) * b.angle_at(j));
    }
  }
  return out / std::sqrt(static_cast<double>(n));
}

Eigen::VectorXcd random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

Eigen::VectorXcd sampled_gaussian(const BasisSpec& b, double sigma) {
  Eigen::VectorXcd ang(b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    const double th = -std::numbers::pi + 2.0 * std::numbers::pi * j / b.n_modes();
    ang(j) = std::exp(-0.5 * sigma * th * th);
  }
  return ang / ang.norm();
}

double sum_p_power(const Eigen::VectorXcd& mom, const BasisSpec& b, int power) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < mom.size(); ++k) {
    s += std::pow(b.index_at(k) * b.hbar_eff(), power) * std::norm(mom(k));
  }
  return s;
}

}  // namespace

TEST(BasisSpec, validates_and_maps_indices) {
  EXPECT_THROW(BasisSpec(7, 1.0), InvalidArgument);
  EXPECT_THROW(BasisSpec(2, 1.0), InvalidArgument);
  EXPECT_THROW(BasisSpec(8, 0.0), InvalidArgument);
  EXPECT_THROW(BasisSpec(8, -1.0), InvalidArgument);

  const BasisSpec b(8, 0.5);
  EXPECT_EQ(b.min_index(), -4);
  EXPECT_EQ(b.max_index(), 3);
  EXPECT_EQ(b.index_at(0), -4);
  EXPECT_EQ(b.position_of(0), 4);
  EXPECT_DOUBLE_EQ(b.momentum_at(b.position_of(3)), 1.5);
  EXPECT_DOUBLE_EQ(b.angle_at(0), -std::numbers::pi);
  EXPECT_NEAR(b.angle_at(4), 0.0, 1e-15);
}

TEST(ModelParams, validation) {
  EXPECT_NO_THROW((ModelParams{6.0, 0.0, 0.3}.validate()));
  EXPECT_THROW((ModelParams{6.0, -0.1, 0.3}.validate()), InvalidArgument);
  EXPECT_THROW((ModelParams{6.0, 0.1, 0.0}.validate()), InvalidArgument);
  EXPECT_THROW((ModelParams{NAN, 0.1, 1.0}.validate()), InvalidArgument);
  EXPECT_TRUE((ModelParams{6.0, 0.0, 0.3}.hermitian()));
  EXPECT_FALSE((ModelParams{6.0, 0.1, 0.3}.hermitian()));
}

TEST(WaveState, rejects_bad_shapes) {
  const BasisSpec b(8, 1.0);
  EXPECT_THROW(WaveState(b, Eigen::VectorXcd::Zero(7)), InvalidArgument);
  EXPECT_THROW(WaveState::momentum_eigenstate(b, 4), InvalidArgument);
  EXPECT_THROW(WaveState::momentum_eigenstate(b, -5), InvalidArgument);
  EXPECT_NO_THROW(WaveState::momentum_eigenstate(b, -4));
}

TEST(SpectralTransform, matches_direct_sum) {
  for (int n : {8, 16, 64}) {
    const BasisSpec b(n, 1.0);
    const Eigen::VectorXcd mom = random_vector(n, 11 + n);
    Eigen::VectorXcd ang = mom;
    SpectralTransform(n).to_angle(ang);
    const Eigen::VectorXcd ref = direct_to_angle(mom, b);
    EXPECT_LT((ang - ref).norm() / ref.norm(), 1e-12) << "N=" << n;

    Eigen::VectorXcd back = ang;
    SpectralTransform(n).to_momentum(back);
    EXPECT_LT((back - direct_to_momentum(ang, b)).norm() / mom.norm(), 1e-12);
  }
}

TEST(SpectralTransform, parseval_and_round_trip) {
  const int n = 4096;
  const Eigen::VectorXcd mom = random_vector(n, 5);
  Eigen::VectorXcd v = mom;
  const SpectralTransform t(n);
  t.to_angle(v);
  EXPECT_NEAR(v.squaredNorm() / mom.squaredNorm(), 1.0, 1e-12);
  t.to_momentum(v);
  for (Eigen::Index k = 0; k < n; ++k) {
    EXPECT_LE(std::abs(v(k) - mom(k)), 1e-12 * std::max(1.0, std::abs(mom(k))));
  }
}

TEST(SpectralTransform, concurrent_use_is_deterministic) {
  const int n = 1024;
  const BasisSpec b(n, 1.0);
  const ModelParams params{5.0, 0.1, 1.0};
  const Eigen::VectorXcd start = gaussian_state(b, 10.0).amplitudes();
  auto run = [&] {
    const FloquetPropagator prop(b, params);
    Eigen::VectorXcd v = start;
    for (int s = 0; s < 50; ++s) {
      prop.step(v, Direction::forward);
      v /= v.norm();
    }
    return v;
  };
  const Eigen::VectorXcd serial = run();
  std::vector<Eigen::VectorXcd> results(4);
  {
    std::vector<std::jthread> pool;
    for (int i = 0; i < 4; ++i) pool.emplace_back([&, i] { results[i] = run(); });
  }
  for (const auto& r : results) EXPECT_EQ(r, serial);
}

TEST(GaussianState, moments) {
  const BasisSpec b(1024, 0.3);
  const WaveState g = gaussian_state(b, 10.0);
  EXPECT_EQ(g.representation(), Representation::momentum);
  EXPECT_NEAR(g.norm_squared(), 1.0, 1e-12);
  EXPECT_NEAR(observables(g).p_mean, 0.0, 1e-10);
  EXPECT_THROW(gaussian_state(b, 0.0), InvalidArgument);
  EXPECT_THROW(gaussian_state(b, -1.0), InvalidArgument);
}

TEST(GaussianState, p2_matches_direct_quadrature) {
  const BasisSpec b(1024, 1.0);
  const Eigen::VectorXcd mom = direct_to_momentum(sampled_gaussian(b, 10.0), b);
  const double oracle = sum_p_power(mom, b, 2) / mom.squaredNorm();
  const double p2 = observables(gaussian_state(b, 10.0)).p2;
  EXPECT_NEAR(p2, oracle, 1e-10 * oracle);
  // Line Gaussian value sigma hbar^2 / 2; truncation and sampling are invisible here.
  EXPECT_NEAR(p2, 5.0, 1e-8);
}

TEST(ApplyKick, zero_kick_is_identity) {
  const BasisSpec b(256, 1.0);
  const WaveState g = gaussian_state(b, 10.0);
  for (Direction d : {Direction::forward, Direction::adjoint}) {
    const WaveState out = apply_kick(g, {0.0, 0.7, 1.0}, d);
    EXPECT_LT((out.amplitudes() - g.amplitudes()).norm(), 1e-12);
  }
}

TEST(ApplyKick, hermitian_kick_preserves_norm) {
  const BasisSpec b(1024, 1.0);
  const WaveState out = apply_kick(gaussian_state(b, 10.0), {5.0, 0.0, 1.0}, Direction::forward);
  EXPECT_NEAR(out.norm_squared(), 1.0, 1e-12);
}

TEST(ApplyKick, gain_matches_dense_quadrature) {
  const BasisSpec b(1024, 1.0);
  const ModelParams params{5.0, 0.15, 1.0};
  const WaveState g = gaussian_state(b, 10.0);
  const Eigen::VectorXcd ang = direct_to_angle(g.amplitudes(), b);
  double oracle = 0.0;
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    oracle += std::norm(std::exp(5.0 * 0.15 * std::sin(b.angle_at(j))) * ang(j));
  }
  for (Direction d : {Direction::forward, Direction::adjoint}) {
    EXPECT_NEAR(apply_kick(g, params, d).norm_squared(), oracle, 1e-10 * oracle);
  }
}

TEST(ApplyKick, adjoint_conjugates_the_phase_only) {
  const BasisSpec b(64, 1.0);
  const ModelParams params{1.3, 0.2, 1.0};
  const WaveState g = gaussian_state(b, 10.0);
  const Eigen::VectorXcd ang = direct_to_angle(g.amplitudes(), b);
  for (Direction d : {Direction::forward, Direction::adjoint}) {
    const double sign = d == Direction::forward ? -1.0 : 1.0;
    const Eigen::VectorXcd got = direct_to_angle(apply_kick(g, params, d, TailGuard::disabled()).amplitudes(), b);
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      const double th = b.angle_at(j);
      const cd factor = std::exp(1.3 * 0.2 * std::sin(th)) * std::polar(1.0, sign * 1.3 * std::cos(th));
      EXPECT_LT(std::abs(got(j) - factor * ang(j)), 1e-12);
    }
  }
}

TEST(ApplyKick, gain_favours_upper_half_circle) {
  const BasisSpec b(256, 1.0);
  const WaveState flat = WaveState::momentum_eigenstate(b, 0);
  const WaveState out = apply_kick(flat, {2.0, 0.1, 1.0}, Direction::forward, TailGuard::disabled());
  const Eigen::VectorXd dens = observables(out).angle_density;
  double upper = 0.0;
  double lower = 0.0;
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    const double th = b.angle_at(j);
    if (th > 0.0 && th < std::numbers::pi) upper += dens(j);
    if (th > -std::numbers::pi && th < 0.0) lower += dens(j);
  }
  EXPECT_GT(upper, lower);
}

TEST(ApplyFree, eigenstate_zero_is_fixed) {
  const BasisSpec b(64, 0.3);
  const WaveState z = WaveState::momentum_eigenstate(b, 0);
  EXPECT_EQ(apply_free(z, {6.0, 0.0, 0.3}, Direction::forward).amplitudes(), z.amplitudes());
}

TEST(ApplyFree, keeps_momentum_distribution_and_inverts) {
  const BasisSpec b(512, 0.3);
  const ModelParams params{6.0, 0.2, 0.3};
  WaveState s(b, random_vector(512, 3));
  const WaveState f = apply_free(s, params, Direction::forward);
  EXPECT_LT((f.amplitudes().cwiseAbs2() - s.amplitudes().cwiseAbs2()).cwiseAbs().maxCoeff(), 1e-12);
  const WaveState back = apply_free(f, params, Direction::adjoint);
  EXPECT_LT((back.amplitudes() - s.amplitudes()).norm() / s.amplitudes().norm(), 1e-12);
  // exp(-i p^2 / (2 hbar)) for index 3
  const WaveState e = apply_free(WaveState::momentum_eigenstate(b, 3), params, Direction::forward);
  const double phase = 9.0 * 0.3 / 2.0;
  EXPECT_LT(std::abs(e.amplitudes()(b.position_of(3)) - std::polar(1.0, -phase)), 1e-14);
}

TEST(FloquetStep, hermitian_round_trip) {
  const BasisSpec b(4096, 0.3);
  const ModelParams params{6.0, 0.0, 0.3};
  const WaveState g = gaussian_state(b, 10.0);
  const FloquetPropagator prop(b, params);
  Eigen::VectorXcd v = g.amplitudes();
  for (int s = 0; s < 50; ++s) prop.step(v, Direction::forward);
  for (int s = 0; s < 50; ++s) prop.step(v, Direction::adjoint);
  EXPECT_NEAR(std::abs(v.dot(g.amplitudes())), 1.0, 1e-9);
}

TEST(FloquetStep, matches_dense_matrix_oracle) {
  const ModelParams params{1.0, 0.1, 1.0};
  const BasisSpec b(8, 1.0);
  const WaveState g = gaussian_state(b, 10.0);
  const Eigen::VectorXcd expect = dense::floquet_matrix(params, 8, Direction::forward) * g.amplitudes();
  const WaveState got = floquet_step(g, params, Direction::forward, TailGuard::disabled());
  for (Eigen::Index k = 0; k < 8; ++k) EXPECT_LT(std::abs(got.amplitudes()(k) - expect(k)), 1e-10);
}

TEST(FloquetStep, random_step_sequences_match_dense_oracle) {
  std::mt19937 rng(17);
  const std::vector<ModelParams> sets{{1.0, 0.1, 1.0}, {2.0, 0.3, 0.5}, {0.7, 0.0, 1.3}};
  for (int n : {8, 16}) {
    for (const ModelParams& p : sets) {
      const Eigen::MatrixXcd fwd = dense::floquet_matrix(p, n, Direction::forward);
      const Eigen::MatrixXcd adj = dense::floquet_matrix(p, n, Direction::adjoint);
      const FloquetPropagator prop(BasisSpec(n, p.hbar_eff), p, TailGuard::disabled());
      Eigen::VectorXcd v = random_vector(n, rng());
      Eigen::VectorXcd w = v;
      for (int s = 0; s < 10; ++s) {
        const Direction d = rng() % 2 ? Direction::forward : Direction::adjoint;
        prop.step(v, d);
        w = ((d == Direction::forward ? fwd : adj) * w).eval();
      }
      EXPECT_LT((v - w).cwiseAbs().maxCoeff() / w.norm(), 1e-9) << "N=" << n;
    }
  }
}

TEST(FloquetStep, dense_adjoint_is_conjugate_transpose) {
  const ModelParams p{1.5, 0.25, 0.8};
  const Eigen::MatrixXcd fwd = dense::floquet_matrix(p, 16, Direction::forward);
  const Eigen::MatrixXcd adj = dense::floquet_matrix(p, 16, Direction::adjoint);
  EXPECT_LT((adj - fwd.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FloquetStep, adjoint_defining_property) {
  const int n = 128;
  const BasisSpec b(n, 0.7);
  for (double lambda : {0.0, 0.05, 0.4}) {
    const FloquetPropagator prop(b, {2.5, lambda, 0.7}, TailGuard::disabled());
    const Eigen::VectorXcd u = random_vector(n, 21);
    const Eigen::VectorXcd v = random_vector(n, 22);
    Eigen::VectorXcd uv = v;
    prop.step(uv, Direction::forward);
    Eigen::VectorXcd du = u;
    prop.step(du, Direction::adjoint);
    const cd lhs = u.dot(uv);
    const cd rhs = du.dot(v);
    EXPECT_LT(std::abs(lhs - rhs), 1e-10 * std::abs(lhs)) << "lambda=" << lambda;
  }
}

TEST(FloquetStep, unitarity_drift) {
  const BasisSpec b(2048, 1.0);
  const FloquetPropagator prop(b, {5.0, 0.0, 1.0});
  Eigen::VectorXcd v = gaussian_state(b, 10.0).amplitudes();
  double worst_step = 0.0;
  for (int s = 0; s < 10000; ++s) {
    const double before = v.squaredNorm();
    prop.step(v, Direction::forward);
    worst_step = std::max(worst_step, std::abs(v.squaredNorm() / before - 1.0));
  }
  EXPECT_LT(worst_step, 1e-13);
  EXPECT_LT(std::abs(v.squaredNorm() - 1.0), 1e-9);
}

TEST(FloquetStep, dynamical_localization_saturates) {
  const BasisSpec b(4096, 1.0);
  const FloquetPropagator prop(b, {5.0, 0.0, 1.0});
  Eigen::VectorXcd v = gaussian_state(b, 10.0).amplitudes();
  double early = 0.0;
  double late = 0.0;
  for (int t = 1; t <= 500; ++t) {
    prop.step(v, Direction::forward);
    const double p2 = moments(v, b).p2;
    if (t > 300 && t <= 400) early += p2;
    if (t > 400) late += p2;
  }
  EXPECT_LT(std::abs(late - early) / early, 0.2);
}

TEST(TailGuard, trips_when_mass_reaches_the_edge) {
  const BasisSpec b(64, 1.0);
  const WaveState edge = WaveState::momentum_eigenstate(b, 30);
  const TailGuard guard;
  EXPECT_GT(guard.tail_mass(edge.amplitudes()), 0.99);
  EXPECT_THROW(guard.check(edge.amplitudes()), GridOverflowError);
  EXPECT_NO_THROW(TailGuard::disabled().check(edge.amplitudes()));
  EXPECT_NO_THROW(guard.check(WaveState::momentum_eigenstate(b, 0).amplitudes()));
  EXPECT_THROW(apply_kick(gaussian_state(b, 10.0), {50.0, 0.0, 1.0}, Direction::forward),
               GridOverflowError);
}

TEST(ApplyP, eigenstate_scaling_and_zero_state) {
  const BasisSpec b(16, 0.5);
  const WaveState out = apply_p(WaveState::momentum_eigenstate(b, 3));
  EXPECT_EQ(out.amplitudes()(b.position_of(3)), cd(1.5, 0.0));
  EXPECT_EQ(out.norm_squared(), 2.25);
  EXPECT_THROW(apply_p(WaveState::momentum_eigenstate(b, 0)), ZeroStateError);
}

TEST(ApplyP, norm_is_second_moment) {
  const BasisSpec b(1024, 0.3);
  const WaveState g = gaussian_state(b, 10.0);
  const double oracle = sum_p_power(g.amplitudes(), b, 2);
  EXPECT_NEAR(apply_p(g).norm_squared(), oracle, 1e-12 * oracle);
}

TEST(Observables, eigenstate_and_pair) {
  const BasisSpec b(16, 1.0);
  const Observables e = observables(WaveState::momentum_eigenstate(b, 2));
  EXPECT_DOUBLE_EQ(e.p_mean, 2.0);
  EXPECT_DOUBLE_EQ(e.p2, 4.0);
  EXPECT_DOUBLE_EQ(e.p4, 16.0);
  EXPECT_NEAR(e.momentum_density.sum(), 1.0, 1e-15);
  EXPECT_NEAR(e.angle_density.sum(), 1.0, 1e-12);

  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(16);
  amps(b.position_of(1)) = 1.0;
  amps(b.position_of(-1)) = 1.0;
  const Observables pair = observables(WaveState(b, amps));
  EXPECT_DOUBLE_EQ(pair.p_mean, 0.0);
  EXPECT_DOUBLE_EQ(pair.p2, 1.0);
  EXPECT_DOUBLE_EQ(pair.norm_squared, 2.0);
}

TEST(Observables, p_insertion_identity) {
  const BasisSpec b(512, 0.7);
  WaveState s(b, random_vector(512, 9));
  const Observables in = observables(s);
  const Observables out = observables(apply_p(s));
  const double direct = sum_p_power(s.amplitudes(), b, 4) / sum_p_power(s.amplitudes(), b, 2);
  EXPECT_NEAR(out.p2, in.p4 / in.p2, 1e-10 * out.p2);
  EXPECT_NEAR(out.p2, direct, 1e-10 * direct);
}

TEST(Propagator, rejects_mismatched_hbar) {
  EXPECT_THROW(FloquetPropagator(BasisSpec(16, 1.0), {1.0, 0.0, 0.5}), InvalidArgument);
}
