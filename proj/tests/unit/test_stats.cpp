#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "filterlab/error.hpp"
#include "filterlab/rng.hpp"
#include "filterlab/stats.hpp"

namespace filterlab {
namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  NormalStream rng(seed);
  std::vector<double> out(n);
  rng.fill(out, scale);
  return out;
}

TEST(Summation, CompensatedSumRecoversSmallTerms) {
  std::vector<double> v{1e16, 1.0, -1e16, 1.0};
  EXPECT_EQ(compensated_sum(v), 2.0);
  EXPECT_EQ(compensated_mean(v), 0.5);
}

TEST(Moments, MatchKnownValues) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const Moments m = moments(v);
  EXPECT_EQ(m.n, 4u);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_DOUBLE_EQ(m.variance, 5.0 / 3.0);
  EXPECT_NEAR(m.mean_se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}

TEST(Moments, CovarianceOfIndependentDrawsIsSmall) {
  const auto a = normals(50000, 1), b = normals(50000, 2);
  const Covariance c = covariance(a, b);
  EXPECT_LE(std::abs(c.value), 4.0 * c.std_error);
  const Covariance s = covariance(a, a);
  EXPECT_NEAR(s.value, moments(a).variance, 1e-12);
}

TEST(Ks, KolmogorovTailAtFivePercent) {
  EXPECT_NEAR(kolmogorov_sf(1.358), 0.05, 1e-3);
  EXPECT_NEAR(kolmogorov_sf(0.0), 1.0, 1e-12);
  EXPECT_LT(kolmogorov_sf(3.0), 1e-6);
}

TEST(Ks, NormalSamplesPassAtNominalRate) {
  int passing = 0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    SampleSet s;
    s.values = normals(10000, derive_seed(12345, Stream::synthetic, r));
    if (ks_test(s, normal_cdf).p_value > 0.01) ++passing;
  }
  EXPECT_GE(passing, 98);
}

TEST(Ks, DetectsWrongScale) {
  SampleSet s;
  s.values = normals(10000, 3, 1.2);
  EXPECT_LT(ks_test(s, normal_cdf).p_value, 1e-6);
}

TEST(Ks, ConstantSampleRejected) {
  SampleSet s;
  s.values.assign(1000, 0.0);
  const KsResult r = ks_test(s, normal_cdf);
  EXPECT_NEAR(r.statistic, 0.5, 1e-12);
  EXPECT_LT(r.p_value, 1e-6);
}

TEST(Ks, UnitWeightsEqualUnweighted) {
  SampleSet a;
  a.values = normals(2000, 4);
  SampleSet b = a;
  b.weights.assign(a.values.size(), 1.0);
  const KsResult ra = ks_test(a, normal_cdf), rb = ks_test(b, normal_cdf);
  EXPECT_NEAR(ra.statistic, rb.statistic, 1e-12);
  EXPECT_NEAR(ra.p_value, rb.p_value, 1e-12);
  EXPECT_NEAR(rb.effective_n, 2000.0, 1e-9);
}

TEST(Standardize, ExcludesZeroVariance) {
  const std::vector<double> err{0.0, 0.0, 0.0};
  const std::vector<double> var{0.0, 0.0, 0.0};
  const Standardized s = standardize_mixed_normal(err, var);
  EXPECT_TRUE(s.degenerate);
  EXPECT_EQ(s.excluded, 3u);
  EXPECT_TRUE(s.z.values.empty());
}

TEST(Standardize, SyntheticMixedNormalIsStandard) {
  // Z = sqrt(V) * N with an independent random V.
  const std::size_t n = 20000;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  const auto xi = normals(n, 18);
  std::vector<double> err(n), var(n);
  for (std::size_t i = 0; i < n; ++i) {
    var[i] = u(rng);
    err[i] = std::sqrt(var[i]) * xi[i];
  }
  var[5] = 0.0;
  const Standardized s = standardize_mixed_normal(err, var);
  EXPECT_EQ(s.excluded, 1u);
  EXPECT_EQ(s.kept.size(), n - 1);
  EXPECT_GT(ks_test(s.z, normal_cdf).p_value, 0.01);
  const Moments m = moments(s.z.values);
  EXPECT_NEAR(m.variance, 1.0, 0.05);
}

std::vector<std::vector<double>> power_law(std::span<const double> levels, double c,
                                           double power, std::uint64_t seed) {
  std::vector<std::vector<double>> errors;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    auto xi = normals(400, derive_seed(seed, Stream::synthetic, i));
    for (double& x : xi) x *= c * std::pow(levels[i], power);
    errors.push_back(xi);
  }
  return errors;
}

TEST(Rate, RecoversHalfOrder) {
  const std::vector<double> levels{16, 32, 64, 128, 256, 512};
  const RateFit f = rate_regression(levels, power_law(levels, 2.0, -0.5, 1), 7);
  EXPECT_NEAR(f.slope, -0.5, 0.05);
  EXPECT_GT(f.slope_se, 0.0);
  EXPECT_LT(f.slope_se, 0.05);
  // E|N| = sqrt(2/pi) for the intercept at log2 scale.
  EXPECT_NEAR(f.intercept, std::log2(2.0 * std::sqrt(2.0 / std::numbers::pi)), 0.2);
}

TEST(Rate, RecoversFirstOrder) {
  const std::vector<double> levels{16, 32, 64, 128, 256, 512};
  const RateFit f = rate_regression(levels, power_law(levels, 1.0, -1.0, 2), 8);
  EXPECT_NEAR(f.slope, -1.0, 0.05);
  ASSERT_EQ(f.mean_abs_error.size(), levels.size());
  EXPECT_GT(f.mean_abs_error.front(), f.mean_abs_error.back());
}

TEST(Rate, DeterministicUnderSeed) {
  const std::vector<double> levels{16, 32, 64, 128};
  const auto errors = power_law(levels, 1.0, -0.5, 3);
  EXPECT_EQ(rate_regression(levels, errors, 5).slope_se,
            rate_regression(levels, errors, 5).slope_se);
  const std::vector<double> short_ladder{16, 32, 64};
  EXPECT_THROW(rate_regression(short_ladder, power_law(short_ladder, 1.0, -0.5, 3), 5),
               EstimationError);
}

TEST(Gaussian, ExpectationOfCosine) {
  for (double var : {0.1, 1.0 / 6.0, 0.5, 2.0}) {
    EXPECT_NEAR(gaussian_expectation([](double x) { return std::cos(x); }, var),
                std::exp(-0.5 * var), 1e-9);
  }
  EXPECT_NEAR(gaussian_expectation([](double x) { return x * x; }, 0.3), 0.3, 1e-9);
  EXPECT_NEAR(gaussian_expectation([](double x) { return x * x * x * x; }, 0.5), 0.75, 1e-8);
}

TEST(Gaussian, TwoDimensionalExpectation) {
  EXPECT_NEAR(gaussian_expectation_2d([](double w, double x) { return w * w * x * x; }), 1.0,
              1e-8);
  EXPECT_NEAR(gaussian_expectation_2d([](double w, double x) { return std::cos(w + x); }),
              std::exp(-1.0), 1e-8);
}

TEST(WeightedCheck, CentredWeightsGiveProductMean) {
  const auto x = normals(50000, 21), y = normals(50000, 22);
  const WeightedCheck c =
      weighted_limit_check(x, y, [](double v) { return v; }, 0.0);
  EXPECT_TRUE(c.pass);
  std::vector<double> ones(x.size(), 1.0);
  const WeightedCheck sq =
      weighted_limit_check(x, ones, [](double v) { return v * v; }, 1.0);
  EXPECT_TRUE(sq.pass);
  EXPECT_NEAR(sq.value, 1.0, 4.0 * sq.std_error);
  const WeightedCheck wrong =
      weighted_limit_check(x, ones, [](double v) { return v * v; }, 1.5);
  EXPECT_FALSE(wrong.pass);
}

TEST(VerdictJson, CarriesAllFields) {
  Verdict v{"rate", "rate_slope", -0.51, -0.5, 0.15, true, 12345};
  const auto j = to_json(v);
  EXPECT_EQ(j.at("suite"), "rate");
  EXPECT_EQ(j.at("statistic"), "rate_slope");
  EXPECT_DOUBLE_EQ(j.at("value").get<double>(), -0.51);
  EXPECT_DOUBLE_EQ(j.at("predicted").get<double>(), -0.5);
  EXPECT_DOUBLE_EQ(j.at("tolerance").get<double>(), 0.15);
  EXPECT_EQ(j.at("pass"), true);
  EXPECT_EQ(j.at("seed").get<std::uint64_t>(), 12345u);
}

}  // namespace
}  // namespace filterlab
