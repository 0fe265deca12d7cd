#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "filterlab/error.hpp"
#include "filterlab/lattice.hpp"
#include "filterlab/limit_lab.hpp"
#include "filterlab/stats.hpp"

namespace filterlab {
namespace {

std::vector<double> double_integrals(std::size_t d, std::size_t n_fine, std::size_t n,
                                     std::size_t i, std::size_t j, std::size_t paths,
                                     std::uint64_t seed, const Integrand& theta) {
  std::vector<double> out(paths);
  for (std::size_t p = 0; p < paths; ++p) {
    out[p] = double_integral(sample_lattice(1, d, n_fine, seed, p), theta, n, i, j);
  }
  return out;
}

TEST(DoubleIntegral, ZeroIntegrandVanishes) {
  const BrownianLattice l = sample_lattice(1, 2, 256, 1, 0);
  EXPECT_EQ(double_integral(l, Integrand::constant(0.0), 16, 0, 0), 0.0);
  EXPECT_EQ(double_integral(l, Integrand::constant(0.0), 16, 0, 1), 0.0);
}

TEST(DoubleIntegral, DiagonalMatchesClosedForm) {
  // With n = n_fine the diagonal integral is sqrt(n) sum ((dW)^2 - dt) / 2.
  const BrownianLattice l = sample_lattice(1, 1, 64, 2, 0);
  NeumaierSum s;
  for (double w : l.dW) s.add(0.5 * (w * w - l.dt()));
  EXPECT_NEAR(double_integral(l, Integrand::constant(1.0), 64, 0, 0), 8.0 * s.value(), 1e-13);
}

TEST(DoubleIntegral, DiagonalVarianceIsOneHalf) {
  const auto v = double_integrals(1, 256, 256, 0, 0, 20000, 3, Integrand::constant(1.0));
  const Moments m = moments(v);
  EXPECT_LE(std::abs(m.mean), 3.0 * m.mean_se);
  EXPECT_LE(std::abs(m.variance - 0.5), 3.0 * m.variance_se);
}

TEST(DoubleIntegral, OffDiagonalVarianceAccountsForFineGrid) {
  const std::size_t n_fine = 256, n = 64;
  const double m_cells = static_cast<double>(n_fine / n);
  const auto v01 = double_integrals(2, n_fine, n, 0, 1, 20000, 4, Integrand::constant(1.0));
  const auto v10 = double_integrals(2, n_fine, n, 1, 0, 20000, 4, Integrand::constant(1.0));
  const Moments m = moments(v01);
  EXPECT_LE(std::abs(m.variance - 0.5 * (1.0 - 1.0 / m_cells)), 3.0 * m.variance_se);
  const Covariance c = covariance(v01, v10);
  EXPECT_LE(std::abs(c.value), 3.0 * c.std_error);
}

TEST(ProjectionCatalog, HasThreeCases) {
  const auto cases = projection_catalog();
  ASSERT_EQ(cases.size(), 3u);
  EXPECT_EQ(find_case("FB1_thetaB").id, "FB1_thetaB");
  EXPECT_THROW(find_case("nope"), ConfigError);
}

TEST(ProjectionCatalog, BrownianCaseHasVarianceOneSixth) {
  const ProjectionCase& c = find_case("FB1_thetaB");
  const std::size_t n_fine = 4096, n = 512, paths = 4000;
  std::vector<double> v(paths);
  for (std::size_t p = 0; p < paths; ++p) {
    v[p] = conditional_double_integral(c, sample_lattice(1, 1, n_fine, 5, p), n);
  }
  const Moments m = moments(v);
  const double target = 1.0 / 6.0 - 1.0 / (4.0 * n);
  EXPECT_LE(std::abs(m.variance - target), 3.0 * m.variance_se);
  EXPECT_LE(std::abs(m.mean), 3.0 * m.mean_se);
}

TEST(ProjectionCatalog, StandardizedFW1IsStandardNormal) {
  const ProjectionCase& c = find_case("FW1_theta1");
  SampleSet z;
  for (std::size_t p = 0; p < 10000; ++p) {
    const BrownianLattice l = sample_lattice(1, 1, 256, 6, p);
    const double w1 = compensated_sum(l.dW);
    const std::vector<double> W1{w1};
    z.values.push_back(conditional_double_integral(c, l, 256) /
                       std::sqrt(c.conditional_variance(W1)));
  }
  EXPECT_GT(ks_test(z, normal_cdf).p_value, 0.01);
}

TEST(ProjectionCatalog, ProjectionMatchesNestedAverage) {
  const ProjectionCase& c = find_case("FB1_thetaB");
  for (std::size_t p = 0; p < 3; ++p) {
    const BrownianLattice l = sample_lattice(1, 1, 256, 7, p);
    const NestedComparison r = nested_conditional(c, l, 32, 4000, 70 + p);
    EXPECT_LE(std::abs(r.projected - r.nested_mean), 4.0 * r.nested_se) << p;
  }
}

TEST(QuadraticVariation, DiagonalConstantIsOneHalf) {
  const BrownianLattice l = sample_lattice(1, 2, 1024, 8, 0);
  const std::vector<std::size_t> ladder{64};
  const auto rows = qv_limit_check(4096, 1000, 8, Integrand::constant(1.0),
                                   Integrand::constant(1.0), 0, 0, ladder, 0.5, 0.02);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].value, 0.5, 3.0 * rows[0].std_error);
  EXPECT_TRUE(rows[0].pass);
  EXPECT_GT(qv_statistic(l, Integrand::constant(1.0), Integrand::constant(1.0), 0, 0, 64), 0.0);
}

TEST(QuadraticVariation, CrossTermVanishes) {
  const std::vector<std::size_t> ladder{64};
  const auto rows = qv_limit_check(4096, 1000, 9, Integrand::constant(1.0),
                                   Integrand::constant(1.0), 0, 1, ladder, 0.0, 0.02);
  EXPECT_NEAR(rows[0].value, 0.0, 3.0 * rows[0].std_error);
}

TEST(QuadraticVariation, PathIntegrandGivesOneQuarter) {
  // E[n int (int_eta^s W^0 dW^1)^2 ds] -> 1/2 int_0^1 E[(W^0_s)^2] ds = 1/4.
  const std::vector<std::size_t> ladder{64};
  const auto rows = qv_limit_check(4096, 2000, 10, Integrand::w_path(0), Integrand::w_path(0), 1,
                                   1, ladder, 0.25, 0.02);
  EXPECT_NEAR(rows[0].value, 0.25, 3.0 * rows[0].std_error + 0.25 / 64.0);
}

TEST(ZeroLimit, ClosedFormProjections) {
  const BrownianLattice l = sample_lattice(1, 1, 1024, 11, 0);
  EXPECT_EQ(find_zero_case("F1_dBdW").projected(l, 64), 0.0);
  EXPECT_EQ(find_zero_case("FB1_dBdB").projected(l, 64), 0.0);
  EXPECT_DOUBLE_EQ(find_zero_case("FB1sq_dBdB").projected(l, 64), 0.125);
  EXPECT_EQ(zero_limit_catalog().size(), 4u);
  EXPECT_THROW(find_zero_case("nope"), ConfigError);
}

TEST(ZeroLimit, ProjectionsMatchNestedMonteCarlo) {
  const std::size_t n_fine = 256, n = 16, inner = 20000;
  const BrownianLattice outer = sample_lattice(1, 1, n_fine, 12, 0);
  for (const auto& c : zero_limit_catalog()) {
    std::vector<double> raw(inner);
    for (std::size_t q = 0; q < inner; ++q) {
      BrownianLattice l = sample_lattice(1, 1, n_fine, 13, q);
      l.dW = outer.dW;
      raw[q] = c.raw(l, n);
    }
    const Moments m = moments(raw);
    EXPECT_LE(std::abs(m.mean - c.projected(outer, n)), 4.0 * m.mean_se) << c.id;
  }
}

TEST(ZeroLimit, BrownianCaseDecaysAtHalfOrder) {
  const std::vector<std::size_t> ladder{16, 32, 64, 128, 256};
  const ZeroLimitTable t = zero_limit_check(find_zero_case("FB1_dBdW"), 2048, 500, 14, ladder);
  ASSERT_EQ(t.rows.size(), ladder.size());
  EXPECT_NEAR(t.slope, -0.5, 0.1);
  // E|N(0, s^2)| with s^2 = n^2 dt^3 m (m - 1) (2m - 1) / 6.
  for (const LimitRow& r : t.rows) {
    const double m = 2048.0 / static_cast<double>(r.n);
    const double dt = 1.0 / 2048.0;
    const double var = static_cast<double>(r.n * r.n) * dt * dt * dt * m * (m - 1) * (2 * m - 1) / 6.0;
    EXPECT_NEAR(r.value, std::sqrt(2.0 / std::numbers::pi * var), 4.0 * r.std_error) << r.n;
  }
}

TEST(Fubini, AllCasesAgree) {
  for (FubiniCase c : {FubiniCase::w_path, FubiniCase::b_path, FubiniCase::b_squared}) {
    const FubiniResult r = fubini_check(c, 500, 100, 15);
    EXPECT_TRUE(r.pass) << r.case_id << " " << r.mean_discrepancy << " +- " << r.std_error;
    EXPECT_EQ(r.case_id, to_string(c));
  }
}

TEST(ZeroConvergence, L2NormsMatchClosedForm) {
  const std::vector<std::size_t> ladder{8, 32, 128};
  const auto rows = zero_convergence_table(1024, 2000, 16, ladder);
  ASSERT_EQ(rows.size(), 3u);
  for (const L2Row& r : rows) {
    const double exact = 1.0 / std::sqrt(3.0 * static_cast<double>(r.n));
    EXPECT_NEAR(r.predicted, exact, 1e-15);
    EXPECT_NEAR(r.l2_A_dM, exact, 0.1 * exact) << r.n;
    EXPECT_NEAR(r.l2_M_dA, exact, 0.1 * exact) << r.n;
  }
}

TEST(StableWeights, MeansMatchGaussianIntegrals) {
  for (StableWeight w : {StableWeight::one, StableWeight::positive_part, StableWeight::exponential}) {
    std::vector<double> v;
    for (std::size_t p = 0; p < 200000; ++p) {
      const BrownianLattice l = sample_lattice(1, 1, 1, 17, p);
      v.push_back(stable_weight(w, l.dW[0]));
    }
    const Moments m = moments(v);
    EXPECT_LE(std::abs(m.mean - stable_weight_mean(w)), 4.0 * m.mean_se + 1e-15) << to_string(w);
  }
  EXPECT_EQ(stable_test_functions().size(), 3u);
}

}  // namespace
}  // namespace filterlab
