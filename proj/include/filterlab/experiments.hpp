#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "filterlab/filter.hpp"
#include "filterlab/lattice.hpp"
#include "filterlab/limit_lab.hpp"
#include "filterlab/model.hpp"
#include "filterlab/stats.hpp"
#include "filterlab/tangent.hpp"

namespace filterlab {

/// Pass thresholds shared by the runner and the acceptance checks.
struct Thresholds {
  double ks_p = 0.01;
  double sigmas = 3.0;
  double slope_target = -0.5;
  double slope_tolerance = 0.15;
  double standard_slope_max = -0.75;
  double mean_tolerance = 0.05;
  double variance_low = 0.8;
  double variance_high = 1.2;
  double variance_relative = 0.25;
  double kalman_fraction = 0.95;
  double noise_ratio = 0.2;
  double variance_floor = 1e-12;
};

/// Observation path number `path_index`: under P the signal is simulated
/// and dY = h dt + dW, otherwise Y is the lattice's Brownian motion.
ObservationPath make_observation(const FilterModel& model, std::size_t n_fine,
                                 std::uint64_t seed, std::uint64_t path_index, bool under_P);

struct VarianceSummary {
  double V_hat = 0.0;
  double std_error = 0.0;
  std::size_t excluded = 0;
};

/// Everything measured on one observation path.
struct PathRecord {
  std::uint64_t path_index = 0;
  bool ok = true;
  std::string error;
  std::size_t failures = 0;
  std::vector<ErrorSample> errors_I, errors_II;          ///< unnormalized, per level
  std::vector<ErrorSample> normalized_I, normalized_II;  ///< per level
  VarianceSummary V_I, V_II;
  VarianceSummary mu_I[2], mu_II[2];  ///< indexed by SignConvention
};

struct PathPlan {
  std::string model_id = "coupled";
  std::string g_id = "shifted-sine";
  std::size_t n_fine = 4096;
  std::vector<std::size_t> levels{16, 32, 64, 128, 256, 512};
  std::size_t paths = 500;
  std::size_t particles = 2000;
  std::uint64_t seed = 12345;
  bool under_P = true;
  bool scheme_I = true;
  bool scheme_II = true;
  bool variance = true;     ///< u, V_hat and mu for each enabled scheme
  bool normalized = false;  ///< also record normalized error samples
  /// One antithetic sweep per level with the bridge reflected inside the
  /// level's own cells.
  bool antithetic = false;
  ExecutionPolicy policy = ExecutionPolicy::parallel;
};

struct PathTable {
  PathPlan plan;
  std::vector<PathRecord> records;
  /// u grids (n_fine + 1) x d x d of the first successful path.
  std::vector<double> u_grid_I, u_grid_II;
  std::size_t d = 0;
};

/// Runs the plan path by path; a path whose sweep throws is kept with its
/// error message and skipped by the statistics.
PathTable run_paths(const PathPlan& plan);

struct MixedNormalStats {
  std::size_t samples = 0;
  std::size_t excluded = 0;
  bool degenerate = false;
  std::vector<double> z;
  std::vector<std::uint64_t> z_paths;  ///< path index of each z
  KsResult ks;
  Moments z_moments;
  double error_variance = 0.0;     ///< sample variance of the rescaled errors
  double error_variance_se = 0.0;
  double mean_V_hat = 0.0;
  double mean_predicted = 0.0;     ///< mean of V_hat (1 - n / n_fine) + se^2
  double relative_error = 0.0;     ///< |error_variance - mean_predicted| / mean_predicted
  bool pass_ks = false;
  bool pass_mean = false;
  bool pass_variance = false;
  bool pass_relative = false;
  bool pass() const { return pass_ks && pass_mean && pass_variance && pass_relative; }
};

/// Standardizes the level-n errors of `scheme` by their predicted variance.
/// Normalized errors use mu with the given sign convention.
MixedNormalStats mixed_normal_stats(const PathTable& table, WeightScheme scheme, std::size_t n,
                                    bool normalized, SignConvention sign,
                                    const Thresholds& th);

struct RateStats {
  RateFit fit;
  std::size_t samples = 0;
  double noise_ratio = 0.0;  ///< mean particle se / mean |error| at the largest level
  bool standard_form = false;
  bool pass_slope = false;
  bool pass_noise = false;
};

/// Log-log fit of E|rho_ref - rho_n| against n. The slope must lie within
/// the tolerance of the target, or below the standard-form bound when
/// `standard_form` is set.
RateStats rate_stats(const PathTable& table, WeightScheme scheme, bool standard_form,
                     const Thresholds& th);

struct KalmanStats {
  std::size_t paths = 0;
  std::size_t within = 0;
  double fraction = 0.0;
  double mean_abs_z = 0.0;
  double m_doubling = 0.0;  ///< mean |pi_M - pi_2M| over the checked paths
  std::vector<double> filter_mean, filter_se, kalman_mean, kalman_se;
  bool pass = false;
};

/// Normalized reference filter for g(x) = x against the Kalman-Bucy mean
/// on `paths` observation paths of the scalar linear-Gaussian model. The
/// combined error is the particle se and the fine-grid ODE error, the
/// latter estimated by halving the ODE step.
KalmanStats kalman_check(std::size_t n_fine, std::size_t paths, std::size_t particles,
                         std::uint64_t seed, const Thresholds& th,
                         ExecutionPolicy policy = ExecutionPolicy::parallel);

/// sqrt(n) int int dW dW with theta = 1 and F = 1 over `lattices` lattices
/// (d = 1), tested against variance 1/2 and against N(0, 1/2). The law of
/// the statistic is exactly that of (chi2_n - n) / (2 sqrt(n)); a second KS
/// test against that law is reported alongside.
struct ThetaOneCheck {
  std::size_t n = 0;
  Moments moments;
  KsResult ks_normal;
  KsResult ks_exact;
  bool pass_variance = false;
  bool pass_ks = false;
  std::vector<double> values;
};

ThetaOneCheck theta_one_check(std::size_t n, std::size_t n_fine, std::size_t lattices,
                              std::uint64_t seed, const Thresholds& th);

/// One weighted stability comparison E[f(sample) Y(W_1)].
struct StableRow {
  std::string weight;
  std::string function;
  WeightedCheck check;
};

/// Case F = B_1, theta = B: conditional variance against 1/6 and the nine
/// weighted stability checks with the factorized prediction
/// E[f(N(0, 1/6))] E[Y].
struct MixedCaseCheck {
  std::size_t n = 0;
  Moments moments;
  bool pass_variance = false;
  std::vector<StableRow> stable;
  bool pass_stable = false;
};

MixedCaseCheck mixed_case_check(std::size_t n, std::size_t n_fine, std::size_t lattices,
                                std::uint64_t seed, const Thresholds& th);

}  // namespace filterlab
