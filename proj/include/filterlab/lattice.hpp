#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace filterlab {

/// Grid projector t -> floor(t n) / n.
double eta(std::size_t n, double t);

bool is_power_of_two(std::size_t n) noexcept;

/// Fine-grid increments of the driving pair (B, W) on [0, 1].
///
/// Increments are stored step-major: `dB[k * e + l]` is the increment of
/// B^l over [k/n_fine, (k+1)/n_fine].
struct BrownianLattice {
  std::size_t n_fine = 0;
  std::size_t e = 0;
  std::size_t d = 0;
  std::vector<double> dB;
  std::vector<double> dW;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;

  std::span<const double> dB_at(std::size_t k) const { return {dB.data() + k * e, e}; }
  std::span<const double> dW_at(std::size_t k) const { return {dW.data() + k * d, d}; }
  double dt() const { return 1.0 / static_cast<double>(n_fine); }
};

/// Draws a lattice as a deterministic function of (seed, path_index).
/// B and W come from separate streams. Throws ConfigError unless n_fine is a
/// power of two.
BrownianLattice sample_lattice(std::size_t e, std::size_t d, std::size_t n_fine,
                               std::uint64_t seed, std::uint64_t path_index);

/// Block sums of step-major increments of width `dim` from n_fine to n steps.
std::vector<double> coarsen(std::span<const double> fine, std::size_t dim, std::size_t n_fine,
                            std::size_t n);

struct CoarseIncrements {
  std::size_t n = 0;
  std::vector<double> dB;
  std::vector<double> dW;
};

/// Coarse increments over [i/n, (i+1)/n]; requires n | n_fine.
CoarseIncrements coarsen(const BrownianLattice& lattice, std::size_t n);

/// An observation path on the fine grid: increments and running values.
struct ObservationPath {
  std::size_t n_fine = 0;
  std::size_t d = 0;
  std::vector<double> dY;  ///< n_fine x d
  std::vector<double> Y;   ///< (n_fine + 1) x d, Y[0] = 0

  std::span<const double> dY_at(std::size_t k) const { return {dY.data() + k * d, d}; }
  std::span<const double> Y_at(std::size_t k) const { return {Y.data() + k * d, d}; }
};

/// Builds an observation path from increments (running sums start at 0).
ObservationPath observation_from_increments(std::vector<double> dY, std::size_t d);

/// Under the reference measure the observation is the lattice's W itself.
ObservationPath brownian_observation(const BrownianLattice& lattice);

}  // namespace filterlab
