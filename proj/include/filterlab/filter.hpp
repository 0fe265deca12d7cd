#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "filterlab/lattice.hpp"
#include "filterlab/model.hpp"

namespace filterlab {

enum class WeightScheme { reference, scheme_I, scheme_II };

std::string to_string(WeightScheme s);
/// Accepts "reference", "I", "II".
WeightScheme parse_weight_scheme(const std::string& s);

struct WeightSchemeSpec {
  WeightScheme tag = WeightScheme::reference;
  std::size_t n = 0;  ///< ignored for the reference scheme
};

enum class ExecutionPolicy { serial, parallel };

/// log of the frozen-integrand exponential
///   sum_i h(U_{i/n}, Y_{i/n}) . (Y_{(i+1)/n} - Y_{i/n}) - |h(U_{i/n}, Y_{i/n})|^2 / (2n)
/// for a path U stored at times k / x_steps, (x_steps + 1) x e values.
double log_weight(const FilterModel& model, std::span<const double> x_states,
                  std::size_t x_steps, const ObservationPath& y, std::size_t n);

struct SweepOptions {
  std::vector<std::size_t> levels;
  bool scheme_I = true;
  bool scheme_II = true;
  bool variance_I = false;   ///< accumulate the scheme-I integrand grids
  bool variance_II = false;  ///< accumulate the tangent-flow integrand grids
  /// Nonzero: each sample pairs the particle noise with its copy whose
  /// Brownian bridges inside the cells of this grid are reflected.
  std::size_t antithetic_level = 0;
  double h_bound = std::numeric_limits<double>::infinity();
  double rcond_floor = 1e-12;
  std::size_t chunks = 32;
  ExecutionPolicy policy = ExecutionPolicy::parallel;
};

/// Per-sample contributions of one particle sweep over a fixed observation
/// path. Level-indexed arrays are stored at [p * levels.size() + l].
struct SweepResult {
  std::size_t samples = 0;
  std::size_t n_fine = 0;
  std::size_t e = 0;
  std::size_t d = 0;
  std::vector<std::size_t> levels;
  std::vector<std::uint8_t> failed;
  std::size_t failures = 0;

  std::vector<double> w_ref, gw_ref;
  std::vector<double> w_I, gw_I;
  std::vector<double> w_II, gw_II;

  /// Sums of the integrand grids per chunk, chunk-major, each block
  /// (n_fine + 1) x d x d.
  std::size_t chunks = 0;
  std::vector<std::size_t> chunk_begin;  ///< chunks + 1 boundaries
  std::vector<std::size_t> chunk_used_I, chunk_used_II;
  std::vector<double> uI_g, uI_one, uII_g, uII_one;
  std::vector<std::uint8_t> flow_flagged;
  std::size_t flow_excluded = 0;

  std::size_t level_index(std::size_t n) const;
  std::size_t grid_size() const { return (n_fine + 1) * d * d; }
};

/// Runs M particles (or M antithetic pairs) against the observation path.
/// Particle p draws its noise from streams keyed by (particle_seed, p), so
/// the result does not depend on the thread count.
SweepResult particle_sweep(const FilterModel& model, const TestFunction& g,
                           const ObservationPath& y, std::size_t M, std::uint64_t particle_seed,
                           const SweepOptions& options);

struct ParticleEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t M = 0;
  std::size_t failures = 0;
};

/// Mean of g * weight (or of the weight alone when `with_g` is false).
ParticleEstimate unnormalized(const SweepResult& r, WeightSchemeSpec scheme, bool with_g = true);
/// Ratio of the g-weighted and plain means.
ParticleEstimate normalized(const SweepResult& r, WeightSchemeSpec scheme);
/// Pathwise difference reference minus scheme, averaged over particles.
ParticleEstimate unnormalized_difference(const SweepResult& r, WeightSchemeSpec scheme);
/// Difference of the two ratio estimates with a delta-method error.
ParticleEstimate normalized_difference(const SweepResult& r, WeightSchemeSpec scheme);

ParticleEstimate rho_estimate(const FilterModel& model, const TestFunction& g,
                              const ObservationPath& y, WeightSchemeSpec scheme, std::size_t M,
                              std::uint64_t seed, const SweepOptions& base = {});

ParticleEstimate filter_estimate(const FilterModel& model, const TestFunction& g,
                                 const ObservationPath& y, WeightSchemeSpec scheme,
                                 std::size_t M, std::uint64_t seed,
                                 const SweepOptions& base = {});

struct ErrorSample {
  std::size_t n = 0;
  double raw = 0.0;        ///< reference minus level-n estimate
  double rescaled = 0.0;   ///< sqrt(n) * raw
  double std_error = 0.0;  ///< particle standard error of `rescaled`
  std::size_t failures = 0;
};

ErrorSample make_error_sample(const SweepResult& r, WeightSchemeSpec scheme, bool normalized);

/// sqrt(n) (rho_ref(g) - rho_n(g)) with common particle noise. Without an
/// observation the lattice's W is the observation path.
ErrorSample error_sample(const FilterModel& model, const BrownianLattice& lattice,
                         const TestFunction& g, WeightScheme scheme, std::size_t n, std::size_t M,
                         std::uint64_t seed, const ObservationPath* observation = nullptr,
                         const SweepOptions& base = {});

/// sqrt(n) (pi_ref(g) - pi_n(g)).
ErrorSample normalized_error_sample(const FilterModel& model, const BrownianLattice& lattice,
                                    const TestFunction& g, WeightScheme scheme, std::size_t n,
                                    std::size_t M, std::uint64_t seed,
                                    const ObservationPath* observation = nullptr,
                                    const SweepOptions& base = {});

/// Seed of the particle noise used against observation `path_index`.
std::uint64_t particle_seed(std::uint64_t seed, std::uint64_t path_index);

/// Kalman-Bucy mean and variance on the observation's fine grid, Euler in time.
struct KalmanBucyPath {
  std::vector<double> mean;
  std::vector<double> variance;
};

KalmanBucyPath kalman_bucy(const ScalarLinearGaussian& p, const ObservationPath& y);

}  // namespace filterlab
