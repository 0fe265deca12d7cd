#include "filterlab/euler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "filterlab/error.hpp"

namespace filterlab {

namespace {

void check_state(std::span<const double> x, std::size_t step) {
  for (double v : x) {
    if (!std::isfinite(v)) throw IntegrationError("non-finite state", step);
  }
}

void check_h(const Coefficients& c, double bound, std::size_t step) {
  for (double v : c.h) {
    if (!std::isfinite(v) || std::abs(v) > bound) {
      throw IntegrationError("observation function out of bounds", step);
    }
  }
}

}  // namespace

void euler_step(const FilterModel& model, std::span<const double> x, std::span<const double> y,
                double dt, std::span<const double> dB, std::span<const double> dY,
                Coefficients& coeffs, std::span<double> x_next) {
  const std::size_t e = model.e(), d = model.d();
  model.evaluate(x, y, coeffs, false);
  for (std::size_t i = 0; i < e; ++i) {
    double acc = x[i] + coeffs.b[i] * dt;
    for (std::size_t l = 0; l < e; ++l) acc += coeffs.sigma[i * e + l] * dB[l];
    for (std::size_t j = 0; j < d; ++j) acc += coeffs.v[i * d + j] * dY[j];
    x_next[i] = acc;
  }
}

EulerTrajectory integrate_euler(const FilterModel& model, const BrownianLattice& lattice,
                                std::size_t n, std::span<const double> x0,
                                const ObservationPath* observation,
                                const IntegrationOptions& options) {
  const std::size_t e = model.e(), d = model.d();
  if (lattice.e != e || lattice.d != d || x0.size() != e) {
    throw ConfigError("dimension mismatch between model, lattice and initial state");
  }
  if (observation != nullptr && (observation->d != d || observation->n_fine != lattice.n_fine)) {
    throw ConfigError("observation path does not match the lattice");
  }
  const std::vector<double> dB = coarsen(lattice.dB, e, lattice.n_fine, n);
  const std::vector<double> dY =
      coarsen(observation != nullptr ? std::span<const double>(observation->dY)
                                     : std::span<const double>(lattice.dW),
              d, lattice.n_fine, n);

  EulerTrajectory traj;
  traj.n = n;
  traj.e = e;
  traj.d = d;
  traj.states.resize((n + 1) * e);
  traj.y_states.assign((n + 1) * d, 0.0);
  if (options.record_log_weight) traj.log_weight_increments.resize(n);
  std::copy(x0.begin(), x0.end(), traj.states.begin());
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < d; ++j) {
      traj.y_states[(k + 1) * d + j] = traj.y_states[k * d + j] + dY[k * d + j];
    }
  }

  const double dt = 1.0 / static_cast<double>(n);
  Coefficients coeffs(e, d);
  for (std::size_t k = 0; k < n; ++k) {
    const std::span<const double> dYk(dY.data() + k * d, d);
    euler_step(model, traj.state_at(k), traj.y_at(k), dt, {dB.data() + k * e, e}, dYk, coeffs,
               {traj.states.data() + (k + 1) * e, e});
    if (options.h_bound < std::numeric_limits<double>::infinity()) {
      check_h(coeffs, options.h_bound, k);
    }
    if (options.record_log_weight) {
      double lw = 0.0;
      for (std::size_t j = 0; j < d; ++j) lw += coeffs.h[j] * dYk[j] - 0.5 * coeffs.h[j] * coeffs.h[j] * dt;
      traj.log_weight_increments[k] = lw;
    }
    check_state(traj.state_at(k + 1), k);
  }
  return traj;
}

EulerTrajectory integrate_reference(const FilterModel& model, const BrownianLattice& lattice,
                                    std::span<const double> x0,
                                    const ObservationPath* observation,
                                    const IntegrationOptions& options) {
  return integrate_euler(model, lattice, lattice.n_fine, x0, observation, options);
}

SimulatedPath simulate_observation(const FilterModel& model, const BrownianLattice& lattice,
                                   std::span<const double> x0,
                                   const IntegrationOptions& options) {
  const std::size_t e = model.e(), d = model.d(), n = lattice.n_fine;
  if (lattice.e != e || lattice.d != d || x0.size() != e) {
    throw ConfigError("dimension mismatch between model, lattice and initial state");
  }
  SimulatedPath out;
  EulerTrajectory& traj = out.signal;
  traj.n = n;
  traj.e = e;
  traj.d = d;
  traj.states.resize((n + 1) * e);
  traj.y_states.assign((n + 1) * d, 0.0);
  std::copy(x0.begin(), x0.end(), traj.states.begin());
  std::vector<double> dY(n * d);

  const double dt = lattice.dt();
  Coefficients coeffs(e, d);
  for (std::size_t k = 0; k < n; ++k) {
    const std::span<const double> x = traj.state_at(k);
    const std::span<const double> y = traj.y_at(k);
    model.evaluate(x, y, coeffs, false);
    if (options.h_bound < std::numeric_limits<double>::infinity()) {
      check_h(coeffs, options.h_bound, k);
    }
    const std::span<const double> dW = lattice.dW_at(k);
    for (std::size_t j = 0; j < d; ++j) dY[k * d + j] = coeffs.h[j] * dt + dW[j];
    const std::span<const double> dB = lattice.dB_at(k);
    for (std::size_t i = 0; i < e; ++i) {
      double acc = x[i] + coeffs.b[i] * dt;
      for (std::size_t l = 0; l < e; ++l) acc += coeffs.sigma[i * e + l] * dB[l];
      for (std::size_t j = 0; j < d; ++j) acc += coeffs.v[i * d + j] * dY[k * d + j];
      traj.states[(k + 1) * e + i] = acc;
    }
    for (std::size_t j = 0; j < d; ++j) {
      traj.y_states[(k + 1) * d + j] = y[j] + dY[k * d + j];
    }
    check_state(traj.state_at(k + 1), k);
  }
  out.observation = observation_from_increments(std::move(dY), d);
  return out;
}

std::vector<double> sample_initial_state(const FilterModel& model, std::uint64_t seed,
                                         std::uint64_t path_index) {
  NormalStream rng(derive_seed(seed, Stream::initial_state, path_index));
  std::vector<double> x0(model.e());
  model.sample_initial(rng, x0);
  return x0;
}

}  // namespace filterlab
