#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "filterlab/lattice.hpp"
#include "filterlab/model.hpp"

namespace filterlab {

/// State path on the grid k/n plus the observation at the same times.
struct EulerTrajectory {
  std::size_t n = 0;
  std::size_t e = 0;
  std::size_t d = 0;
  std::vector<double> states;                 ///< (n+1) x e
  std::vector<double> y_states;               ///< (n+1) x d
  std::vector<double> log_weight_increments;  ///< n entries, empty if not requested

  std::span<const double> state_at(std::size_t k) const { return {states.data() + k * e, e}; }
  std::span<const double> y_at(std::size_t k) const { return {y_states.data() + k * d, d}; }
  std::span<const double> final_state() const { return state_at(n); }
};

struct IntegrationOptions {
  /// Abort when |h| exceeds this bound at an evaluated point.
  double h_bound = std::numeric_limits<double>::infinity();
  bool record_log_weight = false;
};

/// One Euler step x_next = x + b dt + sigma dB + v dY with coefficients at
/// (x, y). `coeffs` is scratch and holds the values at (x, y) afterwards.
void euler_step(const FilterModel& model, std::span<const double> x, std::span<const double> y,
                double dt, std::span<const double> dB, std::span<const double> dY,
                Coefficients& coeffs, std::span<double> x_next);

/// Euler scheme at level n driven by the coarsened lattice noise. With
/// `observation == nullptr` the observation increments are the lattice's dW
/// (reference measure); otherwise they come from the supplied path.
EulerTrajectory integrate_euler(const FilterModel& model, const BrownianLattice& lattice,
                                std::size_t n, std::span<const double> x0,
                                const ObservationPath* observation = nullptr,
                                const IntegrationOptions& options = {});

/// integrate_euler at n = n_fine.
EulerTrajectory integrate_reference(const FilterModel& model, const BrownianLattice& lattice,
                                    std::span<const double> x0,
                                    const ObservationPath* observation = nullptr,
                                    const IntegrationOptions& options = {});

struct SimulatedPath {
  EulerTrajectory signal;
  ObservationPath observation;
};

/// Joint Euler integration of (X, Y) under the original measure with
/// dY = h(X, Y) dt + dW on the fine grid.
SimulatedPath simulate_observation(const FilterModel& model, const BrownianLattice& lattice,
                                   std::span<const double> x0,
                                   const IntegrationOptions& options = {});

/// Draws X0 from the initial law using the dedicated stream for `path_index`.
std::vector<double> sample_initial_state(const FilterModel& model, std::uint64_t seed,
                                         std::uint64_t path_index);

}  // namespace filterlab
