#pragma once

#include <cstddef>
#include <cstdint>

#include "filterlab/filter.hpp"
#include "filterlab/tangent.hpp"

namespace filterlab {

/// Builds u (or mu when `normalized`) and V_hat from the integrand grids of
/// a sweep. scheme_I uses g * a * Phi; scheme_II uses the flow-transported
/// integrand. The standard error of V_hat comes from the chunk means.
///
/// Normalized: mu = (u(g) -/+ pi(g) u(1)) / rho(1) with pi and rho from the
/// reference weights of the same sweep.
VarianceEstimate variance_estimate(const SweepResult& r, WeightScheme scheme, bool normalized,
                                   SignConvention sign = SignConvention::minus);

VarianceEstimate u_estimate_scheme_I(const FilterModel& model, const ObservationPath& y,
                                     const TestFunction& g, std::size_t M, std::uint64_t seed,
                                     const SweepOptions& base = {});

VarianceEstimate u_estimate_scheme_II(const FilterModel& model, const ObservationPath& y,
                                      const TestFunction& g, std::size_t M, std::uint64_t seed,
                                      const SweepOptions& base = {});

VarianceEstimate mu_estimate(const FilterModel& model, const ObservationPath& y,
                             const TestFunction& g, WeightScheme scheme, std::size_t M,
                             std::uint64_t seed, SignConvention sign = SignConvention::minus,
                             const SweepOptions& base = {});

/// Variance of sqrt(n)(rho_ref - rho_n) predicted from V_hat when the
/// reference itself sits on the finite grid n_fine, plus the particle noise
/// of the sample: V_hat (1 - n / n_fine) + se^2.
double predicted_error_variance(double V_hat, std::size_t n, std::size_t n_fine,
                                double particle_se);

}  // namespace filterlab
