#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "filterlab/rng.hpp"

namespace filterlab {

/// Coefficient values and first partials at one point (x, y).
///
/// Index layout (row-major, zero-based):
///   sigma(i,l)        -> i*e + l
///   v(i,j)            -> i*d + j
///   db_dx(i,k)        -> i*e + k
///   dsigma_dx(i,l,k)  -> (i*e + l)*e + k
///   dv_dx(i,j,k)      -> (i*d + j)*e + k
///   dv_dy(i,j,m)      -> (i*d + j)*d + m
///   dh_dx(i,k)        -> i*e + k
///   dh_dy(i,m)        -> i*d + m
struct Coefficients {
  Coefficients() = default;
  Coefficients(std::size_t e, std::size_t d);

  std::size_t e = 0;
  std::size_t d = 0;
  std::vector<double> b, sigma, v, h;
  std::vector<double> db_dx, dsigma_dx, dv_dx, dv_dy, dh_dx, dh_dy;
};

/// Signal/observation model
///   dX = b(X,Y) dt + sigma(X,Y) dB + v(X,Y) dY,   dY = h(X,Y) dt + dW.
class FilterModel {
 public:
  FilterModel(std::string id, std::size_t e, std::size_t d);
  virtual ~FilterModel() = default;

  const std::string& id() const { return id_; }
  std::size_t e() const { return e_; }
  std::size_t d() const { return d_; }

  /// Fills the values (and, when `derivatives`, the first partials).
  virtual void evaluate(std::span<const double> x, std::span<const double> y, Coefficients& out,
                        bool derivatives) const = 0;

  virtual void sample_initial(NormalStream& rng, std::span<double> x0) const = 0;

  /// Uniform bound on |h| and on every listed first partial; +inf if none.
  virtual double coefficient_bound() const { return std::numeric_limits<double>::infinity(); }

  /// True when v == 0 and dh/dy == 0 identically, so the limit variance vanishes.
  virtual bool standard_form() const { return false; }

 private:
  std::string id_;
  std::size_t e_;
  std::size_t d_;
};

/// Affine model: b = A x + a0, sigma = S, v = V, h = C x + c0,
/// X0 ~ N(m0, diag(s0^2)). All matrices row-major.
struct LinearModelParams {
  std::size_t e = 1;
  std::size_t d = 1;
  std::vector<double> A, a0, S, V, C, c0, m0, s0;
};

class LinearModel final : public FilterModel {
 public:
  LinearModel(std::string id, LinearModelParams p);

  void evaluate(std::span<const double> x, std::span<const double> y, Coefficients& out,
                bool derivatives) const override;
  void sample_initial(NormalStream& rng, std::span<double> x0) const override;
  bool standard_form() const override;
  double coefficient_bound() const override;

  const LinearModelParams& params() const { return p_; }

 private:
  LinearModelParams p_;
};

/// Scalar parameters of the built-in linear-Gaussian model
///   dX = a X dt + s dB,  dY = c X dt + dW,  X0 ~ N(m0, p0).
struct ScalarLinearGaussian {
  double a = -0.5;
  double s = 0.8;
  double c = 1.0;
  double m0 = 0.5;
  double p0 = 0.5;
};

std::unique_ptr<LinearModel> make_scalar_linear_gaussian(const ScalarLinearGaussian& p = {});

/// Built-in models: "linear-gaussian", "standard", "coupled", "coupled-2d".
std::unique_ptr<FilterModel> make_model(std::string_view id);
std::vector<std::string> model_ids();

/// Test function g with its gradient.
class TestFunction {
 public:
  explicit TestFunction(std::string id) : id_(std::move(id)) {}
  virtual ~TestFunction() = default;

  const std::string& id() const { return id_; }
  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> out) const = 0;

 private:
  std::string id_;
};

/// "one", "zero", "x1", "shifted-sine" (2 + sin x1), "tanh" (tanh x1),
/// or "const:<value>".
std::unique_ptr<TestFunction> make_test_function(std::string_view id);
std::vector<std::string> test_function_ids();

}  // namespace filterlab
