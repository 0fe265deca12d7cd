#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "filterlab/error.hpp"
#include "filterlab/euler.hpp"
#include "filterlab/filter.hpp"
#include "filterlab/lattice.hpp"
#include "filterlab/model.hpp"
#include "filterlab/tangent.hpp"
#include "filterlab/variance.hpp"

namespace filterlab {
namespace {

LinearModel scalar_drift(double a) {
  LinearModelParams p;
  p.A = {a};
  p.a0 = {0.0};
  p.S = {0.0};
  p.V = {0.0};
  p.C = {0.0};
  p.c0 = {0.0};
  p.m0 = {0.0};
  p.s0 = {0.0};
  return LinearModel("drift", p);
}

/// dX = -X dt + 0.5 dB + v dY with constant v and h = tanh(x).
class TanhObservationModel final : public FilterModel {
 public:
  explicit TanhObservationModel(double v) : FilterModel("tanh-obs", 1, 1), v_(v) {}

  void evaluate(std::span<const double> x, std::span<const double>, Coefficients& out,
                bool derivatives) const override {
    const double t = std::tanh(x[0]);
    out.b[0] = -x[0];
    out.sigma[0] = 0.5;
    out.v[0] = v_;
    out.h[0] = t;
    if (!derivatives) return;
    out.db_dx[0] = -1.0;
    out.dsigma_dx[0] = 0.0;
    out.dv_dx[0] = 0.0;
    out.dv_dy[0] = 0.0;
    out.dh_dx[0] = 1.0 - t * t;
    out.dh_dy[0] = 0.0;
  }

  void sample_initial(NormalStream&, std::span<double> x0) const override { x0[0] = 0.0; }
  double coefficient_bound() const override { return 1.0; }

 private:
  double v_;
};

TangentFlow flow_for(const FilterModel& m, const BrownianLattice& l, std::span<const double> x0,
                     const ObservationPath& y) {
  const EulerTrajectory path = integrate_euler(m, l, l.n_fine, x0, &y);
  return tangent_flow(m, path, l.dB, y.dY);
}

TEST(TangentFlow, ZeroDynamicsIsIdentity) {
  const LinearModel m = scalar_drift(0.0);
  const BrownianLattice l = sample_lattice(1, 1, 64, 1, 0);
  const std::vector<double> x0{0.4};
  const TangentFlow f = flow_for(m, l, x0, brownian_observation(l));
  for (const FlowMatrix& E : f.E) {
    EXPECT_TRUE(E.isApprox(FlowMatrix::Identity(2, 2)));
  }
}

TEST(TangentFlow, ScalarLinearDriftIsExponential) {
  const double a = 0.7;
  const LinearModel m = scalar_drift(a);
  const BrownianLattice l = sample_lattice(1, 1, 4096, 1, 0);
  const std::vector<double> x0{1.0};
  TangentFlow f = flow_for(m, l, x0, brownian_observation(l));
  ASSERT_TRUE(inverse_flow(f));
  EXPECT_NEAR(f.E.back()(0, 0), std::pow(1.0 + a / 4096.0, 4096.0), 1e-12);
  EXPECT_NEAR(f.E.back()(0, 0), std::exp(a), 1e-3);
  EXPECT_NEAR(f.E_inv.back()(0, 0), std::exp(-a), 1e-3);
  EXPECT_EQ(f.E.back()(1, 1), 1.0);
}

TEST(TangentFlow, InversesAreAccurate) {
  const auto m = make_model("coupled-2d");
  const BrownianLattice l = sample_lattice(2, 2, 512, 3, 0);
  const std::vector<double> x0{0.2, -0.3};
  TangentFlow f = flow_for(*m, l, x0, brownian_observation(l));
  ASSERT_TRUE(inverse_flow(f));
  for (std::size_t k = 0; k < f.E.size(); k += 37) {
    const FlowMatrix I = f.E[k] * f.E_inv[k];
    EXPECT_TRUE(I.isApprox(FlowMatrix::Identity(3, 3), 1e-10)) << k;
    EXPECT_GT(f.rcond[k], 1e-6);
    for (Eigen::Index i = 0; i < 2; ++i) EXPECT_EQ(f.E[k](i, 2), 0.0);
  }
}

TEST(TangentFlow, MatchesFiniteDifferencesOfTheEulerMap) {
  const auto m = make_model("coupled-2d");
  const BrownianLattice l = sample_lattice(2, 2, 256, 4, 0);
  const ObservationPath y = brownian_observation(l);
  const std::vector<double> x0{0.5, 0.1};
  const TangentFlow f = flow_for(*m, l, x0, y);
  const double eps = 1e-6;
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<double> up = x0, down = x0;
    up[k] += eps;
    down[k] -= eps;
    const EulerTrajectory pu = integrate_euler(*m, l, 256, up, &y);
    const EulerTrajectory pd = integrate_euler(*m, l, 256, down, &y);
    for (std::size_t i = 0; i < 2; ++i) {
      const double fd = (pu.final_state()[i] - pd.final_state()[i]) / (2.0 * eps);
      EXPECT_NEAR(f.E.back()(i, k), fd, 1e-6);
    }
    const double lw = (log_weight(*m, pu.states, 256, y, 256) -
                       log_weight(*m, pd.states, 256, y, 256)) /
                      (2.0 * eps);
    EXPECT_NEAR(f.E.back()(2, k), lw, 1e-6);
  }
}

TEST(TangentFlow, ChainRuleThroughIntermediateTimes) {
  // E_N E_k^{-1} is the flow of the tail started at time k/N.
  const auto m = make_model("coupled");
  const std::size_t N = 128;
  const BrownianLattice l = sample_lattice(1, 1, N, 5, 0);
  const ObservationPath y = brownian_observation(l);
  const std::vector<double> x0{0.3};
  const EulerTrajectory path = integrate_euler(*m, l, N, x0, &y);
  TangentFlow f = tangent_flow(*m, path, l.dB, y.dY);
  ASSERT_TRUE(inverse_flow(f));
  const double dt = 1.0 / static_cast<double>(N);
  for (std::size_t k : {0u, 1u, 40u, 100u, 127u}) {
    FlowMatrix tail = FlowMatrix::Identity(2, 2);
    for (std::size_t j = k; j < N; ++j) {
      tail = tangent_step(*m, path.state_at(j), path.y_at(j), tail, dt, l.dB_at(j), y.dY_at(j));
    }
    const FlowMatrix lhs = f.E.back() * f.E_inv[k];
    EXPECT_TRUE(lhs.isApprox(tail, 1e-10)) << k;
  }
}

TEST(FCoefficient, LastRowIsSchemeOneIntegrand) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const auto& id : model_ids()) {
    const auto m = make_model(id);
    const std::size_t e = m->e(), d = m->d();
    Coefficients c(e, d);
    std::vector<double> f((e + 1) * d * d), a(d * d);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> x(e), y(d);
      for (double& v : x) v = u(rng);
      for (double& v : y) v = u(rng);
      m->evaluate(x, y, c, true);
      f_coeff(c, f);
      scheme_one_integrand(c, a);
      for (std::size_t ij = 0; ij < d * d; ++ij) {
        EXPECT_NEAR(f[e * d * d + ij], a[ij], 1e-14) << id;
      }
    }
  }
}

TEST(FCoefficient, VanishesForStandardModel) {
  const auto m = make_model("standard");
  Coefficients c(m->e(), m->d());
  std::vector<double> f((m->e() + 1) * m->d() * m->d());
  for (double x : {-1.5, 0.0, 0.8}) {
    const std::vector<double> xs(m->e(), x), ys(m->d(), -x);
    m->evaluate(xs, ys, c, true);
    f_coeff(c, f);
    for (double v : f) EXPECT_EQ(v, 0.0);
  }
}

TEST(FCoefficient, HandCodedTanhModel) {
  const double v = 0.7;
  const TanhObservationModel m(v);
  Coefficients c(1, 1);
  std::vector<double> f(2);
  for (double x : {-1.0, 0.0, 0.6, 2.0}) {
    const std::vector<double> xs{x}, ys{0.3};
    m.evaluate(xs, ys, c, true);
    f_coeff(c, f);
    EXPECT_EQ(f[0], 0.0);
    const double t = std::tanh(x);
    EXPECT_NEAR(f[1], (1.0 - t * t) * v, 1e-15);
  }
}

TEST(VarianceGrid, StandardModelHasZeroLimitVariance) {
  const auto m = make_model("standard");
  const auto g = make_test_function("shifted-sine");
  const BrownianLattice l = sample_lattice(m->e(), m->d(), 64, 6, 0);
  const ObservationPath y = brownian_observation(l);
  SweepOptions base;
  base.h_bound = m->coefficient_bound();
  const VarianceEstimate v1 = u_estimate_scheme_I(*m, y, *g, 50, 1, base);
  const VarianceEstimate v2 = u_estimate_scheme_II(*m, y, *g, 50, 1, base);
  for (double u : v1.u) EXPECT_EQ(u, 0.0);
  for (double u : v2.u) EXPECT_EQ(u, 0.0);
  EXPECT_EQ(v1.V_hat, 0.0);
  EXPECT_EQ(v2.V_hat, 0.0);
}

TEST(VarianceGrid, ZeroTestFunctionHasZeroVariance) {
  const auto m = make_model("coupled");
  const auto g = make_test_function("zero");
  const BrownianLattice l = sample_lattice(1, 1, 64, 7, 0);
  const ObservationPath y = brownian_observation(l);
  EXPECT_EQ(u_estimate_scheme_I(*m, y, *g, 50, 2).V_hat, 0.0);
  EXPECT_EQ(u_estimate_scheme_II(*m, y, *g, 50, 2).V_hat, 0.0);
}

TEST(VarianceGrid, NormalizedConstantHasZeroVariance) {
  const auto m = make_model("coupled");
  const auto g = make_test_function("one");
  const BrownianLattice l = sample_lattice(1, 1, 64, 8, 0);
  const ObservationPath y = brownian_observation(l);
  for (WeightScheme s : {WeightScheme::scheme_I, WeightScheme::scheme_II}) {
    const VarianceEstimate v = mu_estimate(*m, y, *g, s, 100, 3);
    EXPECT_TRUE(v.normalized);
    for (double u : v.u) EXPECT_NEAR(u, 0.0, 1e-12);
    EXPECT_NEAR(v.V_hat, 0.0, 1e-20);
  }
}

TEST(VarianceGrid, UnnormalizedCoupledVarianceIsPositive) {
  const auto m = make_model("coupled");
  const auto g = make_test_function("shifted-sine");
  const BrownianLattice l = sample_lattice(1, 1, 128, 9, 0);
  const ObservationPath y = brownian_observation(l);
  const VarianceEstimate v = u_estimate_scheme_II(*m, y, *g, 200, 4);
  EXPECT_GT(v.V_hat, 0.0);
  EXPECT_GT(v.V_hat_stderr, 0.0);
  EXPECT_EQ(v.u.size(), 129u);
  EXPECT_DOUBLE_EQ(v.V_hat, trapezoid_variance(v.u, 128, 1));
}

TEST(Trapezoid, ConstantGrid) {
  const std::size_t n = 16, d = 2;
  const std::vector<double> u((n + 1) * d * d, 0.5);
  EXPECT_NEAR(trapezoid_variance(u, n, d), 0.5 * 4 * 0.25, 1e-15);
  EXPECT_NEAR(trapezoid_variance(u, n, d, 4), 0.5, 1e-15);
  EXPECT_THROW(trapezoid_variance(u, n, d, 3), ConfigError);
}

TEST(Trapezoid, LinearGridIsExactForSquareIntegral) {
  // u(s) = s: 1/2 int s^2 = 1/6, trapezoid error 1/(12 n^2).
  const std::size_t n = 64;
  std::vector<double> u(n + 1);
  for (std::size_t k = 0; k <= n; ++k) u[k] = static_cast<double>(k) / n;
  EXPECT_NEAR(trapezoid_variance(u, n, 1), 1.0 / 6.0 + 1.0 / (12.0 * n * n), 1e-14);
}

TEST(VariationOfConstants, ZeroCoefficientsGiveZeroResidual) {
  const BrownianLattice l = sample_lattice(1, 1, 256, 10, 0);
  VocParams zero{0, 0, 0, 0, 0, 0, 0};
  EXPECT_EQ(variation_of_constants_residual(l, 256, zero), 0.0);
  VocParams no_a{0, 0, 0, 0, 0.5, 0.7, -0.4};
  EXPECT_NEAR(variation_of_constants_residual(l, 256, no_a), 0.0, 1e-13);
}

TEST(VariationOfConstants, ResidualVanishesUnderRefinement) {
  const std::vector<std::size_t> levels{64, 128, 256, 512, 1024};
  const VocCheck c = variation_of_constants_check(levels, 200, 11);
  ASSERT_EQ(c.rms_residual.size(), levels.size());
  EXPECT_LE(c.slope, -0.4);
  EXPECT_LT(c.rms_residual.back(), c.rms_residual.front());
}

}  // namespace
}  // namespace filterlab
