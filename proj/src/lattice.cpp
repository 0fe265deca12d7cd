#include "filterlab/lattice.hpp"

#include <cmath>
#include <string>

#include "filterlab/error.hpp"
#include "filterlab/rng.hpp"

namespace filterlab {

double eta(std::size_t n, double t) {
  const double nd = static_cast<double>(n);
  return std::floor(t * nd) / nd;
}

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

BrownianLattice sample_lattice(std::size_t e, std::size_t d, std::size_t n_fine,
                               std::uint64_t seed, std::uint64_t path_index) {
  if (!is_power_of_two(n_fine)) {
    throw ConfigError("n_fine must be a power of two, got " + std::to_string(n_fine));
  }
  BrownianLattice lattice;
  lattice.n_fine = n_fine;
  lattice.e = e;
  lattice.d = d;
  lattice.seed = seed;
  lattice.path_index = path_index;
  lattice.dB.resize(n_fine * e);
  lattice.dW.resize(n_fine * d);
  const double scale = std::sqrt(lattice.dt());
  NormalStream b_stream(derive_seed(seed, Stream::signal_noise, path_index));
  NormalStream w_stream(derive_seed(seed, Stream::observation_noise, path_index));
  b_stream.fill(lattice.dB, scale);
  w_stream.fill(lattice.dW, scale);
  return lattice;
}

std::vector<double> coarsen(std::span<const double> fine, std::size_t dim, std::size_t n_fine,
                            std::size_t n) {
  if (n == 0 || n_fine % n != 0) {
    throw ConfigError("level " + std::to_string(n) + " does not divide n_fine " +
                      std::to_string(n_fine));
  }
  const std::size_t block = n_fine / n;
  std::vector<double> out(n * dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i * block; k < (i + 1) * block; ++k) {
      for (std::size_t l = 0; l < dim; ++l) out[i * dim + l] += fine[k * dim + l];
    }
  }
  return out;
}

CoarseIncrements coarsen(const BrownianLattice& lattice, std::size_t n) {
  CoarseIncrements c;
  c.n = n;
  c.dB = coarsen(lattice.dB, lattice.e, lattice.n_fine, n);
  c.dW = coarsen(lattice.dW, lattice.d, lattice.n_fine, n);
  return c;
}

ObservationPath observation_from_increments(std::vector<double> dY, std::size_t d) {
  ObservationPath path;
  path.d = d;
  path.n_fine = d == 0 ? 0 : dY.size() / d;
  path.dY = std::move(dY);
  path.Y.assign((path.n_fine + 1) * d, 0.0);
  for (std::size_t k = 0; k < path.n_fine; ++k) {
    for (std::size_t j = 0; j < d; ++j) {
      path.Y[(k + 1) * d + j] = path.Y[k * d + j] + path.dY[k * d + j];
    }
  }
  return path;
}

ObservationPath brownian_observation(const BrownianLattice& lattice) {
  return observation_from_increments(lattice.dW, lattice.d);
}

}  // namespace filterlab
