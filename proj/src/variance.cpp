#include "filterlab/variance.hpp"

#include <cmath>

#include "filterlab/error.hpp"
#include "filterlab/stats.hpp"

namespace filterlab {

namespace {

/// Trapezoid inner product 1/2-free: sum_ij int u v ds.
double inner(std::span<const double> u, std::span<const double> v, std::size_t n_fine,
             std::size_t dd) {
  const double h = 1.0 / static_cast<double>(n_fine);
  NeumaierSum s;
  for (std::size_t k = 0; k <= n_fine; ++k) {
    const double w = (k == 0 || k == n_fine) ? 0.5 : 1.0;
    double acc = 0.0;
    for (std::size_t ij = 0; ij < dd; ++ij) acc += u[k * dd + ij] * v[k * dd + ij];
    s.add(w * acc);
  }
  return h * s.value();
}

}  // namespace

VarianceEstimate variance_estimate(const SweepResult& r, WeightScheme scheme, bool normalized,
                                   SignConvention sign) {
  const bool first = scheme == WeightScheme::scheme_I;
  if (scheme == WeightScheme::reference) throw ConfigError("variance needs scheme I or II");
  const std::vector<double>& sum_g = first ? r.uI_g : r.uII_g;
  const std::vector<double>& sum_one = first ? r.uI_one : r.uII_one;
  const std::vector<std::size_t>& used = first ? r.chunk_used_I : r.chunk_used_II;
  if (sum_g.empty()) throw ConfigError("sweep did not accumulate the requested integrand");

  const std::size_t G = r.grid_size();
  const std::size_t dd = r.d * r.d;
  std::size_t total = 0;
  for (std::size_t c = 0; c < r.chunks; ++c) total += used[c];
  if (total == 0) throw EstimationError("every particle was excluded from the variance estimate");

  double pi = 0.0, rho1 = 1.0;
  if (normalized) {
    const ParticleEstimate est = filterlab::normalized(r, {WeightScheme::reference, 0});
    const ParticleEstimate den = unnormalized(r, {WeightScheme::reference, 0}, false);
    pi = est.value;
    rho1 = den.value;
  }
  const double s = sign == SignConvention::minus ? -1.0 : 1.0;

  const auto grid_of = [&](std::size_t chunk_lo, std::size_t chunk_hi, std::size_t count,
                           std::vector<double>& out) {
    out.assign(G, 0.0);
    for (std::size_t idx = 0; idx < G; ++idx) {
      NeumaierSum sg, s1;
      for (std::size_t c = chunk_lo; c < chunk_hi; ++c) {
        sg.add(sum_g[c * G + idx]);
        s1.add(sum_one[c * G + idx]);
      }
      const double ug = sg.value() / static_cast<double>(count);
      const double u1 = s1.value() / static_cast<double>(count);
      out[idx] = normalized ? (ug + s * pi * u1) / rho1 : ug;
    }
  };

  VarianceEstimate out;
  out.n_fine = r.n_fine;
  out.d = r.d;
  out.normalized = normalized;
  out.sign = sign;
  out.particles = total;
  out.excluded = r.samples - total;
  grid_of(0, r.chunks, total, out.u);
  out.V_hat = trapezoid_variance(out.u, r.n_fine, r.d);

  std::vector<double> psi;
  std::vector<double> chunk_grid, diff(G);
  for (std::size_t c = 0; c < r.chunks; ++c) {
    if (used[c] == 0) continue;
    grid_of(c, c + 1, used[c], chunk_grid);
    for (std::size_t idx = 0; idx < G; ++idx) diff[idx] = chunk_grid[idx] - out.u[idx];
    psi.push_back(inner(out.u, diff, r.n_fine, dd));
  }
  if (psi.size() >= 2) {
    NeumaierSum sq;
    for (double v : psi) sq.add(v * v);
    const double k = static_cast<double>(psi.size());
    out.V_hat_stderr = std::sqrt(sq.value() / (k * (k - 1.0)));
  }
  return out;
}

namespace {

SweepOptions variance_options(SweepOptions base, bool first) {
  base.levels.clear();
  base.scheme_I = false;
  base.scheme_II = false;
  base.variance_I = first;
  base.variance_II = !first;
  return base;
}

}  // namespace

VarianceEstimate u_estimate_scheme_I(const FilterModel& model, const ObservationPath& y,
                                     const TestFunction& g, std::size_t M, std::uint64_t seed,
                                     const SweepOptions& base) {
  const SweepResult r = particle_sweep(model, g, y, M, seed, variance_options(base, true));
  return variance_estimate(r, WeightScheme::scheme_I, false);
}

VarianceEstimate u_estimate_scheme_II(const FilterModel& model, const ObservationPath& y,
                                      const TestFunction& g, std::size_t M, std::uint64_t seed,
                                      const SweepOptions& base) {
  const SweepResult r = particle_sweep(model, g, y, M, seed, variance_options(base, false));
  return variance_estimate(r, WeightScheme::scheme_II, false);
}

VarianceEstimate mu_estimate(const FilterModel& model, const ObservationPath& y,
                             const TestFunction& g, WeightScheme scheme, std::size_t M,
                             std::uint64_t seed, SignConvention sign, const SweepOptions& base) {
  const bool first = scheme == WeightScheme::scheme_I;
  const SweepResult r = particle_sweep(model, g, y, M, seed, variance_options(base, first));
  return variance_estimate(r, scheme, true, sign);
}

double predicted_error_variance(double V_hat, std::size_t n, std::size_t n_fine,
                                double particle_se) {
  const double ratio = static_cast<double>(n) / static_cast<double>(n_fine);
  return V_hat * (1.0 - ratio) + particle_se * particle_se;
}

}  // namespace filterlab
