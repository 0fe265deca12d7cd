#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace filterlab {

/// Compensated (Neumaier) summation.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> values);
double compensated_mean(std::span<const double> values);

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double mean_se = 0.0;
  double variance = 0.0;     ///< unbiased sample variance
  double variance_se = 0.0;  ///< from the fourth central moment
};

Moments moments(std::span<const double> values);

/// Sample covariance with its standard error.
struct Covariance {
  double value = 0.0;
  double std_error = 0.0;
};
Covariance covariance(std::span<const double> a, std::span<const double> b);

struct SampleSet {
  std::vector<double> values;
  std::vector<double> weights;  ///< empty means unweighted
  std::string label;
};

double normal_cdf(double x);

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_sf(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
  double effective_n = 0.0;
};

/// Two-sided KS test with asymptotic p-value. With weights the empirical CDF
/// is weighted and the effective sample size is (sum w)^2 / sum w^2.
KsResult ks_test(const SampleSet& samples, const std::function<double(double)>& cdf);

struct Standardized {
  SampleSet z;
  std::vector<std::size_t> kept;  ///< indices of the retained samples
  std::size_t excluded = 0;
  bool degenerate = false;  ///< every sample excluded
};

/// z = error / sqrt(variance); samples with variance <= floor are excluded.
Standardized standardize_mixed_normal(std::span<const double> errors,
                                      std::span<const double> variances, double floor = 1e-12);

struct RateFit {
  std::vector<double> levels;
  std::vector<double> mean_abs_error;
  std::vector<double> mean_abs_error_se;
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
};

/// Least-squares fit of log2(mean |error|) against log2(n); the slope error
/// comes from resampling within each level.
RateFit rate_regression(std::span<const double> levels,
                        const std::vector<std::vector<double>>& errors, std::uint64_t seed,
                        std::size_t resamples = 200);

struct WeightedCheck {
  double value = 0.0;
  double std_error = 0.0;
  double predicted = 0.0;
  double predicted_error = 0.0;
  bool pass = false;
};

/// Compares the sample mean of f(x_i) * y_i with a prediction within
/// `sigmas` combined standard errors.
WeightedCheck weighted_limit_check(std::span<const double> samples,
                                   std::span<const double> weights,
                                   const std::function<double(double)>& f, double predicted,
                                   double predicted_error = 0.0, double sigmas = 3.0);

/// E[f(sqrt(variance) * xi)] for a standard normal xi.
double gaussian_expectation(const std::function<double(double)>& f, double variance,
                            std::size_t nodes = 2001);

/// E[F(w, xi)] for independent standard normals w and xi.
double gaussian_expectation_2d(const std::function<double(double, double)>& f,
                               std::size_t nodes = 801);

struct Verdict {
  std::string suite;
  std::string statistic;
  double value = 0.0;
  double predicted = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const Verdict& v);

}  // namespace filterlab
