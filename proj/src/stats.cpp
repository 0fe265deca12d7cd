#include "filterlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "filterlab/error.hpp"
#include "filterlab/rng.hpp"

namespace filterlab {

double compensated_sum(std::span<const double> values) {
  NeumaierSum s;
  for (double v : values) s.add(v);
  return s.value();
}

double compensated_mean(std::span<const double> values) {
  if (values.empty()) throw EstimationError("mean of an empty sample");
  return compensated_sum(values) / static_cast<double>(values.size());
}

Moments moments(std::span<const double> values) {
  Moments m;
  m.n = values.size();
  if (m.n < 2) throw EstimationError("moments need at least two samples");
  const double nd = static_cast<double>(m.n);
  m.mean = compensated_mean(values);
  NeumaierSum s2, s4;
  for (double v : values) {
    const double c = v - m.mean;
    s2.add(c * c);
    s4.add(c * c * c * c);
  }
  const double m2 = s2.value() / nd;
  const double m4 = s4.value() / nd;
  m.variance = s2.value() / (nd - 1.0);
  m.mean_se = std::sqrt(m.variance / nd);
  m.variance_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / nd);
  return m;
}

Covariance covariance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw EstimationError("covariance needs two aligned samples of size >= 2");
  }
  const double nd = static_cast<double>(a.size());
  const double ma = compensated_mean(a);
  const double mb = compensated_mean(b);
  std::vector<double> prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) prod[i] = (a[i] - ma) * (b[i] - mb);
  const Moments mp = moments(prod);
  return {mp.mean * nd / (nd - 1.0), mp.mean_se};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  constexpr int kTerms = 100;
  constexpr double kTol = 1e-10;
  if (lambda < 1.18) {
    // CDF = sqrt(2 pi)/lambda * sum_k exp(-(2k-1)^2 pi^2 / (8 lambda^2))
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k <= kTerms; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * c);
      sum += term;
      if (term < kTol * sum) break;
    }
    const double cdf = std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= kTerms; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < kTol) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(const SampleSet& samples, const std::function<double(double)>& cdf) {
  const std::size_t n = samples.values.size();
  if (n == 0) throw EstimationError("KS test on an empty sample");
  const bool weighted = !samples.weights.empty();
  if (weighted && samples.weights.size() != n) {
    throw EstimationError("KS weights do not match the sample size");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return samples.values[a] < samples.values[b];
  });

  double total = 0.0, total_sq = 0.0;
  if (weighted) {
    for (double w : samples.weights) {
      if (!(w >= 0.0)) throw EstimationError("KS weights must be nonnegative");
      total += w;
      total_sq += w * w;
    }
    if (total <= 0.0) throw EstimationError("KS weights sum to zero");
  } else {
    total = static_cast<double>(n);
    total_sq = total;
  }

  double stat = 0.0;
  double cum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    const double x = samples.values[order[i]];
    const double f = cdf(x);
    const double below = cum / total;
    // consume ties
    while (i < n && samples.values[order[i]] == x) {
      cum += weighted ? samples.weights[order[i]] : 1.0;
      ++i;
    }
    const double above = cum / total;
    stat = std::max({stat, std::abs(f - below), std::abs(above - f)});
  }
  KsResult r;
  r.statistic = stat;
  r.effective_n = total * total / total_sq;
  r.p_value = kolmogorov_sf(std::sqrt(r.effective_n) * stat);
  return r;
}

Standardized standardize_mixed_normal(std::span<const double> errors,
                                      std::span<const double> variances, double floor) {
  if (errors.size() != variances.size()) {
    throw EstimationError("errors and variances are not aligned");
  }
  Standardized out;
  out.z.label = "standardized";
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(variances[i] > floor) || !std::isfinite(errors[i])) {
      ++out.excluded;
      continue;
    }
    out.z.values.push_back(errors[i] / std::sqrt(variances[i]));
    out.kept.push_back(i);
  }
  out.degenerate = out.z.values.empty();
  return out;
}

namespace {

struct LineFit {
  double slope;
  double intercept;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const double nd = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nd;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / nd;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

double mean_abs(std::span<const double> v) {
  NeumaierSum s;
  for (double x : v) s.add(std::abs(x));
  return s.value() / static_cast<double>(v.size());
}

}  // namespace

RateFit rate_regression(std::span<const double> levels,
                        const std::vector<std::vector<double>>& errors, std::uint64_t seed,
                        std::size_t resamples) {
  if (levels.size() < 4) throw EstimationError("rate regression needs at least 4 levels");
  if (errors.size() != levels.size()) throw EstimationError("one error sample per level required");
  RateFit fit;
  fit.levels.assign(levels.begin(), levels.end());
  std::vector<double> lx(levels.size()), ly(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (errors[i].size() < 2) throw EstimationError("too few samples at a level");
    std::vector<double> abs_err(errors[i].size());
    std::transform(errors[i].begin(), errors[i].end(), abs_err.begin(),
                   [](double v) { return std::abs(v); });
    const Moments m = moments(abs_err);
    fit.mean_abs_error.push_back(m.mean);
    fit.mean_abs_error_se.push_back(m.mean_se);
    lx[i] = std::log2(levels[i]);
    ly[i] = std::log2(m.mean);
  }
  const LineFit lf = least_squares(lx, ly);
  fit.slope = lf.slope;
  fit.intercept = lf.intercept;

  std::mt19937_64 rng(derive_seed(seed, Stream::bootstrap));
  std::vector<double> slopes(resamples);
  std::vector<double> resample;
  for (std::size_t r = 0; r < resamples; ++r) {
    std::vector<double> by(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const auto& src = errors[i];
      std::uniform_int_distribution<std::size_t> pick(0, src.size() - 1);
      resample.resize(src.size());
      for (double& v : resample) v = src[pick(rng)];
      by[i] = std::log2(mean_abs(resample));
    }
    slopes[r] = least_squares(lx, by).slope;
  }
  if (resamples >= 2) fit.slope_se = std::sqrt(moments(slopes).variance);
  return fit;
}

WeightedCheck weighted_limit_check(std::span<const double> samples,
                                   std::span<const double> weights,
                                   const std::function<double(double)>& f, double predicted,
                                   double predicted_error, double sigmas) {
  if (!weights.empty() && weights.size() != samples.size()) {
    throw EstimationError("weights do not match samples");
  }
  std::vector<double> prod(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    prod[i] = f(samples[i]) * (weights.empty() ? 1.0 : weights[i]);
  }
  const Moments m = moments(prod);
  WeightedCheck c;
  c.value = m.mean;
  c.std_error = m.mean_se;
  c.predicted = predicted;
  c.predicted_error = predicted_error;
  const double combined = std::hypot(m.mean_se, predicted_error);
  c.pass = std::abs(m.mean - predicted) <= sigmas * combined;
  return c;
}

namespace {

constexpr double kGaussHalfWidth = 10.0;

double simpson_weight(std::size_t k, std::size_t nodes) {
  if (k == 0 || k + 1 == nodes) return 1.0;
  return k % 2 == 1 ? 4.0 : 2.0;
}

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

double gaussian_expectation(const std::function<double(double)>& f, double variance,
                            std::size_t nodes) {
  if (nodes % 2 == 0) ++nodes;
  const double sd = std::sqrt(std::max(variance, 0.0));
  const double h = 2.0 * kGaussHalfWidth / static_cast<double>(nodes - 1);
  NeumaierSum s;
  for (std::size_t k = 0; k < nodes; ++k) {
    const double z = -kGaussHalfWidth + h * static_cast<double>(k);
    s.add(simpson_weight(k, nodes) * std_normal_pdf(z) * f(sd * z));
  }
  return s.value() * h / 3.0;
}

double gaussian_expectation_2d(const std::function<double(double, double)>& f,
                               std::size_t nodes) {
  if (nodes % 2 == 0) ++nodes;
  const double h = 2.0 * kGaussHalfWidth / static_cast<double>(nodes - 1);
  NeumaierSum s;
  for (std::size_t a = 0; a < nodes; ++a) {
    const double w = -kGaussHalfWidth + h * static_cast<double>(a);
    const double wa = simpson_weight(a, nodes) * std_normal_pdf(w);
    NeumaierSum inner;
    for (std::size_t b = 0; b < nodes; ++b) {
      const double z = -kGaussHalfWidth + h * static_cast<double>(b);
      inner.add(simpson_weight(b, nodes) * std_normal_pdf(z) * f(w, z));
    }
    s.add(wa * inner.value());
  }
  return s.value() * h * h / 9.0;
}

nlohmann::json to_json(const Verdict& v) {
  return {{"suite", v.suite},         {"statistic", v.statistic}, {"value", v.value},
          {"predicted", v.predicted}, {"tolerance", v.tolerance}, {"pass", v.pass},
          {"seed", v.seed}};
}

}  // namespace filterlab
