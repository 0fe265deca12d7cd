#include "filterlab/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "filterlab/error.hpp"

namespace filterlab {

Coefficients::Coefficients(std::size_t e_, std::size_t d_)
    : e(e_),
      d(d_),
      b(e_),
      sigma(e_ * e_),
      v(e_ * d_),
      h(d_),
      db_dx(e_ * e_),
      dsigma_dx(e_ * e_ * e_),
      dv_dx(e_ * d_ * e_),
      dv_dy(e_ * d_ * d_),
      dh_dx(d_ * e_),
      dh_dy(d_ * d_) {}

FilterModel::FilterModel(std::string id, std::size_t e, std::size_t d)
    : id_(std::move(id)), e_(e), d_(d) {
  if (e == 0 || d == 0) throw ConfigError("model dimensions must be positive");
}

// ---------------------------------------------------------------------------
// LinearModel

namespace {

void require_size(const std::vector<double>& v, std::size_t n, const char* name) {
  if (v.size() != n) {
    throw ConfigError(std::string("linear model parameter ") + name + " has wrong size");
  }
}

bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return a == 0.0; });
}

}  // namespace

LinearModel::LinearModel(std::string id, LinearModelParams p)
    : FilterModel(std::move(id), p.e, p.d), p_(std::move(p)) {
  const std::size_t e = p_.e, d = p_.d;
  require_size(p_.A, e * e, "A");
  require_size(p_.a0, e, "a0");
  require_size(p_.S, e * e, "S");
  require_size(p_.V, e * d, "V");
  require_size(p_.C, d * e, "C");
  require_size(p_.c0, d, "c0");
  require_size(p_.m0, e, "m0");
  require_size(p_.s0, e, "s0");
}

void LinearModel::evaluate(std::span<const double> x, std::span<const double>, Coefficients& out,
                           bool derivatives) const {
  const std::size_t e = p_.e, d = p_.d;
  for (std::size_t i = 0; i < e; ++i) {
    double acc = p_.a0[i];
    for (std::size_t k = 0; k < e; ++k) acc += p_.A[i * e + k] * x[k];
    out.b[i] = acc;
  }
  std::copy(p_.S.begin(), p_.S.end(), out.sigma.begin());
  std::copy(p_.V.begin(), p_.V.end(), out.v.begin());
  for (std::size_t i = 0; i < d; ++i) {
    double acc = p_.c0[i];
    for (std::size_t k = 0; k < e; ++k) acc += p_.C[i * e + k] * x[k];
    out.h[i] = acc;
  }
  if (!derivatives) return;
  std::copy(p_.A.begin(), p_.A.end(), out.db_dx.begin());
  std::fill(out.dsigma_dx.begin(), out.dsigma_dx.end(), 0.0);
  std::fill(out.dv_dx.begin(), out.dv_dx.end(), 0.0);
  std::fill(out.dv_dy.begin(), out.dv_dy.end(), 0.0);
  std::copy(p_.C.begin(), p_.C.end(), out.dh_dx.begin());
  std::fill(out.dh_dy.begin(), out.dh_dy.end(), 0.0);
}

void LinearModel::sample_initial(NormalStream& rng, std::span<double> x0) const {
  for (std::size_t i = 0; i < p_.e; ++i) x0[i] = p_.m0[i] + p_.s0[i] * rng();
}

bool LinearModel::standard_form() const { return all_zero(p_.V); }

double LinearModel::coefficient_bound() const {
  // h is affine in x; bounded only when it does not depend on x.
  if (!all_zero(p_.C)) return std::numeric_limits<double>::infinity();
  double bound = 0.0;
  for (double c : p_.c0) bound = std::max(bound, std::abs(c));
  for (double a : p_.A) bound = std::max(bound, std::abs(a));
  return bound;
}

std::unique_ptr<LinearModel> make_scalar_linear_gaussian(const ScalarLinearGaussian& p) {
  LinearModelParams lp;
  lp.e = 1;
  lp.d = 1;
  lp.A = {p.a};
  lp.a0 = {0.0};
  lp.S = {p.s};
  lp.V = {0.0};
  lp.C = {p.c};
  lp.c0 = {0.0};
  lp.m0 = {p.m0};
  lp.s0 = {std::sqrt(p.p0)};
  return std::make_unique<LinearModel>("linear-gaussian", std::move(lp));
}

// ---------------------------------------------------------------------------
// Nonlinear catalog models

namespace {

/// v = 0, h = h(x): b = -x + 0.5 sin x, sigma = 0.5 + 0.2 cos x, h = 1.5 tanh x.
class StandardModel final : public FilterModel {
 public:
  StandardModel() : FilterModel("standard", 1, 1) {}

  void evaluate(std::span<const double> x, std::span<const double>, Coefficients& out,
                bool derivatives) const override {
    const double s = std::sin(x[0]);
    const double c = std::cos(x[0]);
    const double t = std::tanh(x[0]);
    out.b[0] = -x[0] + 0.5 * s;
    out.sigma[0] = 0.5 + 0.2 * c;
    out.v[0] = 0.0;
    out.h[0] = 1.5 * t;
    if (!derivatives) return;
    out.db_dx[0] = -1.0 + 0.5 * c;
    out.dsigma_dx[0] = -0.2 * s;
    out.dv_dx[0] = 0.0;
    out.dv_dy[0] = 0.0;
    out.dh_dx[0] = 1.5 * (1.0 - t * t);
    out.dh_dy[0] = 0.0;
  }

  void sample_initial(NormalStream& rng, std::span<double> x0) const override {
    x0[0] = 0.2 + 0.5 * rng();
  }

  double coefficient_bound() const override { return 2.0; }
  bool standard_form() const override { return true; }
};

/// Scalar model with v != 0 and h depending on both x and y:
///   b = -x + 0.5 sin y,  sigma = 0.6 + 0.2 cos x,
///   v = 0.6 + 0.3 sin(x + y/2),  h = 1.2 tanh x + 0.5 sin y.
class CoupledModel final : public FilterModel {
 public:
  CoupledModel() : FilterModel("coupled", 1, 1) {}

  void evaluate(std::span<const double> x, std::span<const double> y, Coefficients& out,
                bool derivatives) const override {
    const double sy = std::sin(y[0]);
    const double phase = x[0] + 0.5 * y[0];
    const double sp = std::sin(phase);
    const double t = std::tanh(x[0]);
    out.b[0] = -x[0] + 0.5 * sy;
    out.v[0] = 0.6 + 0.3 * sp;
    out.h[0] = 1.2 * t + 0.5 * sy;
    if (!derivatives) {
      out.sigma[0] = 0.6 + 0.2 * std::cos(x[0]);
      return;
    }
    const double sx = std::sin(x[0]);
    const double cx = std::cos(x[0]);
    const double cp = std::cos(phase);
    out.sigma[0] = 0.6 + 0.2 * cx;
    out.db_dx[0] = -1.0;
    out.dsigma_dx[0] = -0.2 * sx;
    out.dv_dx[0] = 0.3 * cp;
    out.dv_dy[0] = 0.15 * cp;
    out.dh_dx[0] = 1.2 * (1.0 - t * t);
    out.dh_dy[0] = 0.5 * std::cos(y[0]);
  }

  void sample_initial(NormalStream& rng, std::span<double> x0) const override {
    x0[0] = 0.5 * rng();
  }

  double coefficient_bound() const override { return 2.0; }
};

/// Two-dimensional signal and observation, every coupling switched on.
class Coupled2dModel final : public FilterModel {
 public:
  Coupled2dModel() : FilterModel("coupled-2d", 2, 2) {}

  void evaluate(std::span<const double> x, std::span<const double> y, Coefficients& out,
                bool derivatives) const override {
    const double x1 = x[0], x2 = x[1], y1 = y[0], y2 = y[1];
    const double t1 = std::tanh(x1);
    const double t2 = std::tanh(x2 - x1);
    const double tv = std::tanh(x2);
    out.b[0] = -x1 + 0.3 * std::sin(x2 + y1);
    out.b[1] = -0.5 * x2 + 0.2 * std::cos(x1 - y2);
    out.sigma[0] = 0.5 + 0.1 * std::cos(x1);
    out.sigma[1] = 0.1 * std::sin(x2);
    out.sigma[2] = 0.0;
    out.sigma[3] = 0.4 + 0.1 * std::sin(x1);
    out.v[0] = 0.5 + 0.2 * std::sin(x1 + y2);
    out.v[1] = 0.1 * tv;
    out.v[2] = 0.2 * std::cos(x2 - y1);
    out.v[3] = 0.4;
    out.h[0] = t1 + 0.3 * std::sin(y2);
    out.h[1] = 0.8 * t2 + 0.2 * std::cos(y1);
    if (!derivatives) return;

    std::fill(out.dsigma_dx.begin(), out.dsigma_dx.end(), 0.0);
    std::fill(out.dv_dx.begin(), out.dv_dx.end(), 0.0);
    std::fill(out.dv_dy.begin(), out.dv_dy.end(), 0.0);

    out.db_dx[0] = -1.0;
    out.db_dx[1] = 0.3 * std::cos(x2 + y1);
    out.db_dx[2] = -0.2 * std::sin(x1 - y2);
    out.db_dx[3] = -0.5;

    // (i*e + l)*e + k
    out.dsigma_dx[(0 * 2 + 0) * 2 + 0] = -0.1 * std::sin(x1);
    out.dsigma_dx[(0 * 2 + 1) * 2 + 1] = 0.1 * std::cos(x2);
    out.dsigma_dx[(1 * 2 + 1) * 2 + 0] = 0.1 * std::cos(x1);

    // (i*d + j)*e + k and (i*d + j)*d + m
    const double c12 = std::cos(x1 + y2);
    const double s21 = std::sin(x2 - y1);
    out.dv_dx[(0 * 2 + 0) * 2 + 0] = 0.2 * c12;
    out.dv_dx[(0 * 2 + 1) * 2 + 1] = 0.1 * (1.0 - tv * tv);
    out.dv_dx[(1 * 2 + 0) * 2 + 1] = -0.2 * s21;
    out.dv_dy[(0 * 2 + 0) * 2 + 1] = 0.2 * c12;
    out.dv_dy[(1 * 2 + 0) * 2 + 0] = 0.2 * s21;

    out.dh_dx[0] = 1.0 - t1 * t1;
    out.dh_dx[1] = 0.0;
    out.dh_dx[2] = -0.8 * (1.0 - t2 * t2);
    out.dh_dx[3] = 0.8 * (1.0 - t2 * t2);
    out.dh_dy[0] = 0.0;
    out.dh_dy[1] = 0.3 * std::cos(y2);
    out.dh_dy[2] = -0.2 * std::sin(y1);
    out.dh_dy[3] = 0.0;
  }

  void sample_initial(NormalStream& rng, std::span<double> x0) const override {
    x0[0] = 0.5 * rng();
    x0[1] = 0.5 * rng();
  }

  double coefficient_bound() const override { return 2.0; }
};

}  // namespace

std::unique_ptr<FilterModel> make_model(std::string_view id) {
  if (id == "linear-gaussian") return make_scalar_linear_gaussian();
  if (id == "standard") return std::make_unique<StandardModel>();
  if (id == "coupled") return std::make_unique<CoupledModel>();
  if (id == "coupled-2d") return std::make_unique<Coupled2dModel>();
  throw ConfigError("unknown model '" + std::string(id) + "'");
}

std::vector<std::string> model_ids() {
  return {"linear-gaussian", "standard", "coupled", "coupled-2d"};
}

// ---------------------------------------------------------------------------
// Test functions

namespace {

class ConstantFunction final : public TestFunction {
 public:
  ConstantFunction(std::string id, double c) : TestFunction(std::move(id)), c_(c) {}
  double value(std::span<const double>) const override { return c_; }
  void gradient(std::span<const double>, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
  }

 private:
  double c_;
};

class FirstCoordinate final : public TestFunction {
 public:
  FirstCoordinate() : TestFunction("x1") {}
  double value(std::span<const double> x) const override { return x[0]; }
  void gradient(std::span<const double>, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = 1.0;
  }
};

class ShiftedSine final : public TestFunction {
 public:
  ShiftedSine() : TestFunction("shifted-sine") {}
  double value(std::span<const double> x) const override { return 2.0 + std::sin(x[0]); }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = std::cos(x[0]);
  }
};

class Tanh final : public TestFunction {
 public:
  Tanh() : TestFunction("tanh") {}
  double value(std::span<const double> x) const override { return std::tanh(x[0]); }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    const double t = std::tanh(x[0]);
    out[0] = 1.0 - t * t;
  }
};

}  // namespace

std::unique_ptr<TestFunction> make_test_function(std::string_view id) {
  if (id == "one") return std::make_unique<ConstantFunction>("one", 1.0);
  if (id == "zero") return std::make_unique<ConstantFunction>("zero", 0.0);
  if (id == "x1") return std::make_unique<FirstCoordinate>();
  if (id == "shifted-sine") return std::make_unique<ShiftedSine>();
  if (id == "tanh") return std::make_unique<Tanh>();
  if (id.starts_with("const:")) {
    const std::string_view num = id.substr(6);
    double c = 0.0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), c);
    if (ec != std::errc() || ptr != num.data() + num.size()) {
      throw ConfigError("bad constant test function '" + std::string(id) + "'");
    }
    return std::make_unique<ConstantFunction>(std::string(id), c);
  }
  throw ConfigError("unknown test function '" + std::string(id) + "'");
}

std::vector<std::string> test_function_ids() {
  return {"one", "zero", "x1", "shifted-sine", "tanh", "const:<c>"};
}

}  // namespace filterlab
