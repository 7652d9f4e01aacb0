#include <cmath>
#include <limits>
#include <vector>

#include "gtest/gtest.h"

#include "ptkr/errors.hpp"
#include "ptkr/phase_scan.hpp"
#include "ptkr/transform.hpp"

using namespace ptkr;

namespace {

NormSeries synthetic(double rate, int t_max) {
  NormSeries s;
  for (int t = 0; t <= t_max; ++t) s.log_norm.push_back(rate * t);
  return s;
}

ClassifierOptions quick_options() {
  ClassifierOptions o;
  o.n_modes = 8192;
  o.t_max = 500;
  o.t_max_limit = 1000;
  return o;
}

}  // namespace

TEST(NormSeries, unitary_evolution_keeps_unit_norm) {
  const NormSeries s = norm_series({5.0, 0.0, 1.0}, BasisSpec(2048, 1.0), 10.0, 500);
  ASSERT_EQ(s.t_max(), 500);
  EXPECT_EQ(s.log_norm.front(), 0.0);
  for (double v : s.log_norm) EXPECT_LE(std::abs(v), 1e-9);
  EXPECT_FALSE(s.overflow_at.has_value());
}

TEST(NormSeries, agrees_with_unnormalized_evolution) {
  const BasisSpec b(4096, 1.0);
  const ModelParams p{5.0, 0.3, 1.0};
  const NormSeries s = norm_series(p, b, 10.0, 20);
  const FloquetPropagator prop(b, p);
  Eigen::VectorXcd v = gaussian_state(b, 10.0).amplitudes();
  for (int t = 1; t <= 20; ++t) {
    prop.step(v, Direction::forward);
    const double direct = std::log(v.squaredNorm());
    EXPECT_NEAR(s.log_norm[t], direct, 1e-9 * std::max(1.0, std::abs(direct))) << "t=" << t;
  }
  for (double v2 : s.log_norm) EXPECT_TRUE(std::isfinite(v2));
}

TEST(NormSeries, weak_breaking_stays_near_unity) {
  const NormSeries s = norm_series({5.0, 0.01, 1.0}, BasisSpec(8192, 1.0), 10.0, 1000);
  for (double v : s.log_norm) EXPECT_LT(std::abs(v), 0.1);
}

TEST(GrowthFit, synthetic_series) {
  const GrowthFit lin = fit_growth_rate(synthetic(0.3, 200));
  EXPECT_NEAR(lin.mu, 0.3, 1e-12);
  EXPECT_NEAR(lin.r_squared, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(lin.window_lo, 100.0);
  EXPECT_DOUBLE_EQ(lin.window_hi, 200.0);

  const GrowthFit flat = fit_growth_rate(synthetic(0.0, 200));
  EXPECT_EQ(flat.mu, 0.0);

  EXPECT_THROW(fit_growth_rate(synthetic(0.1, 200), TimeWindow{0.0, 5.0}), FitError);
}

TEST(MeanLogNorm, geometric_sum_oracle) {
  const NormSeries s = synthetic(0.1, 100);
  const double q = std::exp(0.1);
  const double closed = std::log(q * (std::exp(10.0) - 1.0) / (q - 1.0) / 100.0);
  EXPECT_NEAR(mean_log_norm(s, TimeWindow{1.0, 100.0}), closed, 1e-8);
  EXPECT_EQ(mean_log_norm(synthetic(0.0, 50)), 0.0);
  EXPECT_THROW(mean_log_norm(s, TimeWindow{200.0, 300.0}), FitError);
  // Far beyond the range of a plain average.
  EXPECT_NEAR(mean_log_norm(synthetic(10.0, 1000), TimeWindow{1000.0, 1000.0}), 1e4, 1e-9);
}

TEST(MeanLogNorm, small_hbar_below_threshold) {
  const NormSeries s = norm_series({5.0, 1e-4, 0.1}, BasisSpec(32768, 0.1), 10.0, 1000);
  EXPECT_LT(std::abs(mean_log_norm(s)), 0.1);
}

TEST(Classify, labels_known_points) {
  const BasisSpec b(16384, 1.0);
  const Classification low = classify_point({5.0, 0.01, 1.0}, b, 10.0, 2000, 1e-4);
  EXPECT_EQ(low.label, PhaseLabel::unbroken);
  const Classification high = classify_point({5.0, 0.3, 1.0}, b, 10.0, 1000, 1e-4);
  EXPECT_EQ(high.label, PhaseLabel::broken);
  EXPECT_GT(high.mu, 0.0);
  EXPECT_LE(high.mu, 1.5);
  const Classification free = classify_point({0.0, 0.5, 1.0}, b, 10.0, 1000, 1e-4);
  EXPECT_EQ(free.label, PhaseLabel::unbroken);
  EXPECT_LE(std::abs(free.mu), 1e-9);
  EXPECT_STREQ(to_string(PhaseLabel::broken), "broken");
}

TEST(Classify, mu_non_decreasing_in_lambda) {
  const BasisSpec b(16384, 1.0);
  double prev = -1.0;
  for (double lambda : {0.0, 0.1, 0.2, 0.3}) {
    const double mu = classify_point({5.0, lambda, 1.0}, b, 10.0, 1000, 1e-4).mu;
    EXPECT_GE(mu, prev - 3e-3) << "lambda=" << lambda;
    prev = mu;
  }
}

TEST(LambdaC, rejects_invalid_brackets) {
  const ClassifierOptions o = quick_options();
  EXPECT_THROW(find_lambda_c(5.0, 1.0, 0.2, 0.1, 1e-3, o), BracketError);
  EXPECT_THROW(find_lambda_c(5.0, 1.0, 0.2, 0.3, 1e-3, o), BracketError);
  EXPECT_THROW(find_lambda_c(5.0, 1.0, 0.0, 1e-6, 1e-7, o), BracketError);
}

TEST(LambdaC, bracket_contains_result) {
  const LambdaCResult r = find_lambda_c(5.0, 1.0, 1e-5, 0.3, 1e-2, quick_options());
  EXPECT_LE(r.bracket_lo, r.lambda_c);
  EXPECT_GE(r.bracket_hi, r.lambda_c);
  EXPECT_LE(r.bracket_hi - r.bracket_lo, 1e-2);
  EXPECT_GT(r.evaluations, 2);
}

TEST(ScanDiagram, single_broken_cell) {
  ClassifierOptions o = quick_options();
  o.n_modes = 16384;
  const PhaseDiagram d = scan_diagram({5.0}, {0.3}, 1.0, o);
  ASSERT_EQ(d.cells.size(), 1u);
  EXPECT_EQ(d.cell(0, 0).classification.label, PhaseLabel::broken);
  ASSERT_TRUE(d.boundary(0).has_value());
  EXPECT_EQ(*d.boundary(0), 0.3);
}

TEST(ScanDiagram, hermitian_column_is_unbroken) {
  const PhaseDiagram d = scan_diagram({2.0, 5.0, 8.0}, {0.0}, 1.0, quick_options());
  for (const PhaseCell& c : d.cells) EXPECT_EQ(c.classification.label, PhaseLabel::unbroken);
  EXPECT_FALSE(d.boundary(0).has_value());
}

TEST(ScanDiagram, boundary_non_increasing_in_kick_and_deterministic) {
  const std::vector<double> ks{4.0, 8.0};
  const std::vector<double> ls{0.002, 0.005, 0.01, 0.02, 0.05, 0.1};
  const ClassifierOptions o = quick_options();
  const PhaseDiagram a = scan_diagram(ks, ls, 1.0, o, 1);
  const PhaseDiagram b = scan_diagram(ks, ls, 1.0, o, 2);
  ASSERT_EQ(a.cells.size(), ks.size() * ls.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_EQ(a.cells[i].classification.mu, b.cells[i].classification.mu);
    EXPECT_EQ(a.cells[i].classification.label, b.cells[i].classification.label);
  }
  ASSERT_TRUE(a.boundary(1).has_value());
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_LE(a.boundary(1).value_or(inf), a.boundary(0).value_or(inf));
  EXPECT_EQ(a.cell(1, 2).kick_strength, 8.0);
  EXPECT_EQ(a.cell(1, 2).non_hermiticity, 0.01);
}
