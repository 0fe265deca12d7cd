#include "filterlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>

#include "filterlab/error.hpp"
#include "filterlab/euler.hpp"
#include "filterlab/variance.hpp"

namespace filterlab {

ObservationPath make_observation(const FilterModel& model, std::size_t n_fine,
                                 std::uint64_t seed, std::uint64_t path_index, bool under_P) {
  const BrownianLattice lattice = sample_lattice(model.e(), model.d(), n_fine, seed, path_index);
  if (!under_P) return brownian_observation(lattice);
  const std::vector<double> x0 = sample_initial_state(model, seed, path_index);
  IntegrationOptions opt;
  opt.h_bound = model.coefficient_bound();
  return simulate_observation(model, lattice, x0, opt).observation;
}

namespace {

VarianceSummary summarize(const VarianceEstimate& v) {
  return {v.V_hat, v.V_hat_stderr, v.excluded};
}

void record_sweep(const SweepResult& r, const PathPlan& plan, PathRecord& rec, PathTable& table,
                  bool first_path) {
  const bool grids = plan.variance && !plan.antithetic;
  for (std::size_t n : r.levels) {
    if (plan.scheme_I) {
      rec.errors_I.push_back(make_error_sample(r, {WeightScheme::scheme_I, n}, false));
      if (plan.normalized) {
        rec.normalized_I.push_back(make_error_sample(r, {WeightScheme::scheme_I, n}, true));
      }
    }
    if (plan.scheme_II) {
      rec.errors_II.push_back(make_error_sample(r, {WeightScheme::scheme_II, n}, false));
      if (plan.normalized) {
        rec.normalized_II.push_back(make_error_sample(r, {WeightScheme::scheme_II, n}, true));
      }
    }
  }
  if (!grids) return;
  const SignConvention signs[2] = {SignConvention::minus, SignConvention::plus};
  if (plan.scheme_I) {
    const VarianceEstimate v = variance_estimate(r, WeightScheme::scheme_I, false);
    rec.V_I = summarize(v);
    if (first_path) table.u_grid_I = v.u;
    if (plan.normalized) {
      for (int s = 0; s < 2; ++s) {
        rec.mu_I[s] = summarize(variance_estimate(r, WeightScheme::scheme_I, true, signs[s]));
      }
    }
  }
  if (plan.scheme_II) {
    const VarianceEstimate v = variance_estimate(r, WeightScheme::scheme_II, false);
    rec.V_II = summarize(v);
    if (first_path) table.u_grid_II = v.u;
    if (plan.normalized) {
      for (int s = 0; s < 2; ++s) {
        rec.mu_II[s] = summarize(variance_estimate(r, WeightScheme::scheme_II, true, signs[s]));
      }
    }
  }
}

}  // namespace

PathTable run_paths(const PathPlan& plan) {
  if (plan.levels.empty()) throw ConfigError("run_paths needs at least one level");
  for (std::size_t n : plan.levels) {
    if (n == 0 || plan.n_fine % n != 0 || n > plan.n_fine / 8) {
      throw ConfigError("level " + std::to_string(n) + " must divide n_fine and be <= n_fine / 8");
    }
  }
  const auto model = make_model(plan.model_id);
  const auto g = make_test_function(plan.g_id);

  PathTable table;
  table.plan = plan;
  table.d = model->d();
  table.records.reserve(plan.paths);

  SweepOptions base;
  base.scheme_I = plan.scheme_I;
  base.scheme_II = plan.scheme_II;
  base.h_bound = model->coefficient_bound();
  base.policy = plan.policy;

  bool grids_taken = false;
  for (std::size_t p = 0; p < plan.paths; ++p) {
    PathRecord rec;
    rec.path_index = p;
    try {
      const ObservationPath y = make_observation(*model, plan.n_fine, plan.seed, p, plan.under_P);
      const std::uint64_t pseed = particle_seed(plan.seed, p);
      if (plan.antithetic) {
        for (std::size_t n : plan.levels) {
          SweepOptions opt = base;
          opt.levels = {n};
          opt.antithetic_level = n;
          const SweepResult r = particle_sweep(*model, *g, y, plan.particles, pseed, opt);
          rec.failures = std::max(rec.failures, r.failures);
          record_sweep(r, plan, rec, table, false);
        }
      } else {
        SweepOptions opt = base;
        opt.levels = plan.levels;
        opt.variance_I = plan.variance && plan.scheme_I;
        opt.variance_II = plan.variance && plan.scheme_II;
        const SweepResult r = particle_sweep(*model, *g, y, plan.particles, pseed, opt);
        rec.failures = r.failures;
        record_sweep(r, plan, rec, table, !grids_taken);
        grids_taken = true;
      }
    } catch (const IntegrationError& e) {
      rec.ok = false;
      rec.error = e.what();
    } catch (const EstimationError& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    table.records.push_back(std::move(rec));
  }
  return table;
}

namespace {

std::size_t level_slot(const PathPlan& plan, std::size_t n) {
  const auto it = std::find(plan.levels.begin(), plan.levels.end(), n);
  if (it == plan.levels.end()) throw ConfigError("level " + std::to_string(n) + " was not run");
  return static_cast<std::size_t>(it - plan.levels.begin());
}

}  // namespace

MixedNormalStats mixed_normal_stats(const PathTable& table, WeightScheme scheme, std::size_t n,
                                    bool normalized, SignConvention sign,
                                    const Thresholds& th) {
  const bool first = scheme == WeightScheme::scheme_I;
  const std::size_t slot = level_slot(table.plan, n);
  const int s = sign == SignConvention::minus ? 0 : 1;
  std::vector<double> errors, predicted, v_hat;
  std::vector<std::uint64_t> paths;
  for (const PathRecord& rec : table.records) {
    if (!rec.ok) continue;
    const std::vector<ErrorSample>& es =
        normalized ? (first ? rec.normalized_I : rec.normalized_II)
                   : (first ? rec.errors_I : rec.errors_II);
    if (slot >= es.size()) throw ConfigError("error samples missing for the requested scheme");
    const VarianceSummary& v =
        normalized ? (first ? rec.mu_I[s] : rec.mu_II[s]) : (first ? rec.V_I : rec.V_II);
    errors.push_back(es[slot].rescaled);
    paths.push_back(rec.path_index);
    v_hat.push_back(v.V_hat);
    predicted.push_back(
        predicted_error_variance(v.V_hat, n, table.plan.n_fine, es[slot].std_error));
  }

  MixedNormalStats out;
  const Standardized st = standardize_mixed_normal(errors, predicted, th.variance_floor);
  out.samples = st.z.values.size();
  out.excluded = st.excluded;
  out.degenerate = st.degenerate;
  out.z = st.z.values;
  for (std::size_t i : st.kept) out.z_paths.push_back(paths[i]);
  if (out.samples >= 2) {
    out.ks = ks_test(st.z, normal_cdf);
    out.z_moments = moments(out.z);
  }
  if (errors.size() >= 2) {
    const Moments em = moments(errors);
    out.error_variance = em.variance;
    out.error_variance_se = em.variance_se;
    out.mean_V_hat = compensated_mean(v_hat);
    out.mean_predicted = compensated_mean(predicted);
    out.relative_error = out.mean_predicted > 0.0
                             ? std::abs(out.error_variance - out.mean_predicted) / out.mean_predicted
                             : std::numeric_limits<double>::infinity();
  }
  out.pass_ks = !out.degenerate && out.samples >= 2 && out.ks.p_value > th.ks_p;
  out.pass_mean = out.samples >= 2 && std::abs(out.z_moments.mean) <= th.mean_tolerance;
  out.pass_variance = out.samples >= 2 && out.z_moments.variance >= th.variance_low &&
                      out.z_moments.variance <= th.variance_high;
  out.pass_relative = out.relative_error <= th.variance_relative;
  return out;
}

RateStats rate_stats(const PathTable& table, WeightScheme scheme, bool standard_form,
                     const Thresholds& th) {
  const bool first = scheme == WeightScheme::scheme_I;
  const std::size_t L = table.plan.levels.size();
  std::vector<std::vector<double>> errors(L);
  std::vector<double> se_top;
  for (const PathRecord& rec : table.records) {
    if (!rec.ok) continue;
    const std::vector<ErrorSample>& es = first ? rec.errors_I : rec.errors_II;
    if (es.size() != L) throw ConfigError("error samples missing for the requested scheme");
    for (std::size_t l = 0; l < L; ++l) errors[l].push_back(es[l].raw);
    se_top.push_back(es[L - 1].std_error / std::sqrt(static_cast<double>(es[L - 1].n)));
  }
  RateStats out;
  out.standard_form = standard_form;
  out.samples = se_top.size();
  std::vector<double> levels(table.plan.levels.begin(), table.plan.levels.end());
  out.fit = rate_regression(levels, errors, derive_seed(table.plan.seed, Stream::bootstrap, 0));
  const double top = out.fit.mean_abs_error.back();
  out.noise_ratio = top > 0.0 ? compensated_mean(se_top) / top
                              : std::numeric_limits<double>::infinity();
  out.pass_slope = standard_form
                       ? out.fit.slope <= th.standard_slope_max
                       : std::abs(out.fit.slope - th.slope_target) <= th.slope_tolerance;
  out.pass_noise = out.noise_ratio < th.noise_ratio;
  return out;
}

KalmanStats kalman_check(std::size_t n_fine, std::size_t paths, std::size_t particles,
                         std::uint64_t seed, const Thresholds& th, ExecutionPolicy policy) {
  const ScalarLinearGaussian params{};
  const auto model = make_scalar_linear_gaussian(params);
  const auto g = make_test_function("x1");
  SweepOptions base;
  base.policy = policy;
  base.scheme_I = false;
  base.scheme_II = false;

  KalmanStats out;
  out.paths = paths;
  std::vector<double> abs_z, doubling;
  const std::size_t doubling_paths = std::min<std::size_t>(paths, 10);
  for (std::size_t p = 0; p < paths; ++p) {
    const ObservationPath y = make_observation(*model, n_fine, seed, p, true);
    const KalmanBucyPath kb = kalman_bucy(params, y);
    const ObservationPath half =
        observation_from_increments(coarsen(y.dY, 1, n_fine, n_fine / 2), 1);
    const KalmanBucyPath kb_half = kalman_bucy(params, half);
    const double ode_error = std::abs(kb.mean.back() - kb_half.mean.back());

    const std::uint64_t pseed = particle_seed(seed, p);
    const ParticleEstimate est =
        filter_estimate(*model, *g, y, {WeightScheme::reference, 0}, particles, pseed, base);
    const double combined = std::sqrt(est.std_error * est.std_error + ode_error * ode_error);
    const double diff = est.value - kb.mean.back();
    out.filter_mean.push_back(est.value);
    out.filter_se.push_back(est.std_error);
    out.kalman_mean.push_back(kb.mean.back());
    out.kalman_se.push_back(ode_error);
    if (std::abs(diff) <= th.sigmas * combined) ++out.within;
    abs_z.push_back(combined > 0.0 ? std::abs(diff) / combined : 0.0);
    if (p < doubling_paths) {
      const ParticleEstimate twice = filter_estimate(*model, *g, y, {WeightScheme::reference, 0},
                                                     2 * particles, pseed, base);
      doubling.push_back(std::abs(twice.value - est.value));
    }
  }
  out.fraction = paths ? static_cast<double>(out.within) / static_cast<double>(paths) : 0.0;
  out.mean_abs_z = compensated_mean(abs_z);
  out.m_doubling = compensated_mean(doubling);
  out.pass = paths > 0 && out.fraction >= th.kalman_fraction;
  return out;
}

ThetaOneCheck theta_one_check(std::size_t n, std::size_t n_fine, std::size_t lattices,
                              std::uint64_t seed, const Thresholds& th) {
  if (lattices < 50) throw ConfigError("theta_one_check needs at least 50 lattices");
  ThetaOneCheck out;
  out.n = n;
  out.values.resize(lattices);
  const Integrand one = Integrand::constant(1.0);
  for (std::size_t p = 0; p < lattices; ++p) {
    const BrownianLattice lattice = sample_lattice(1, 1, n_fine, seed, p);
    out.values[p] = double_integral(lattice, one, n, 0, 0);
  }
  out.moments = moments(out.values);
  out.pass_variance = std::abs(out.moments.variance - 0.5) <= th.sigmas * out.moments.variance_se;
  SampleSet set;
  set.values = out.values;
  set.label = "F1_theta1";
  out.ks_normal = ks_test(set, [](double x) { return normal_cdf(x * std::sqrt(2.0)); });
  const double dn = static_cast<double>(n);
  const boost::math::chi_squared law(dn);
  out.ks_exact = ks_test(set, [&](double x) {
    const double q = dn + 2.0 * std::sqrt(dn) * x;
    return q <= 0.0 ? 0.0 : boost::math::cdf(law, q);
  });
  out.pass_ks = out.ks_normal.p_value > th.ks_p;
  return out;
}

MixedCaseCheck mixed_case_check(std::size_t n, std::size_t n_fine, std::size_t lattices,
                                std::uint64_t seed, const Thresholds& th) {
  if (lattices < 2) throw ConfigError("mixed_case_check needs at least 2 lattices");
  const ProjectionCase& c = find_case("FB1_thetaB");
  MixedCaseCheck out;
  out.n = n;
  std::vector<double> values(lattices), W1(lattices);
  for (std::size_t p = 0; p < lattices; ++p) {
    const BrownianLattice lattice = sample_lattice(1, 1, n_fine, seed, p);
    values[p] = conditional_double_integral(c, lattice, n);
    W1[p] = compensated_sum(lattice.dW);
  }
  out.moments = moments(values);
  const double target = 1.0 / 6.0;
  out.pass_variance =
      std::abs(out.moments.variance - target) <= th.sigmas * out.moments.variance_se;
  out.pass_stable = true;
  for (StableWeight w : {StableWeight::one, StableWeight::positive_part, StableWeight::exponential}) {
    std::vector<double> weights(lattices);
    for (std::size_t p = 0; p < lattices; ++p) weights[p] = stable_weight(w, W1[p]);
    for (const TestFn& f : stable_test_functions()) {
      const double predicted = gaussian_expectation(f.f, target) * stable_weight_mean(w);
      StableRow row{to_string(w), f.id,
                    weighted_limit_check(values, weights, f.f, predicted, 0.0, th.sigmas)};
      out.pass_stable = out.pass_stable && row.check.pass;
      out.stable.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace filterlab
