#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "filterlab/lattice.hpp"

namespace filterlab {

/// Adapted integrand evaluated at fine grid time t from the path values
/// B_t (e entries) and W_t (d entries).
class Integrand {
 public:
  using Fn = std::function<double(double t, std::span<const double> B, std::span<const double> W)>;

  static Integrand constant(double c);
  static Integrand time();
  static Integrand b_path(std::size_t l);
  static Integrand w_path(std::size_t l);
  static Integrand custom(Fn fn);

  double operator()(double t, std::span<const double> B, std::span<const double> W) const {
    switch (kind_) {
      case Kind::constant:
        return value_;
      case Kind::time:
        return t;
      case Kind::b_path:
        return B[index_];
      case Kind::w_path:
        return W[index_];
      case Kind::custom:
        return fn_(t, B, W);
    }
    return 0.0;
  }

  bool is_constant() const { return kind_ == Kind::constant; }
  double constant_value() const { return value_; }

 private:
  enum class Kind { constant, time, b_path, w_path, custom };
  Kind kind_ = Kind::constant;
  double value_ = 1.0;
  std::size_t index_ = 0;
  Fn fn_;
};

/// sqrt(n) int_0^1 lambda_s (int_{eta_n(s)}^s theta_r dW_r^j) dW_s^i on the
/// fine grid, inner integral reset at the level-n grid times. On the
/// diagonal i = j each fine step adds the exact Ito term
/// lambda theta ((dW)^2 - dt) / 2.
double double_integral(const BrownianLattice& lattice, const Integrand& theta, std::size_t n,
                       std::size_t i, std::size_t j,
                       const Integrand& lambda = Integrand::constant(1.0));

/// A case with a closed-form projection E[F theta_r | F_r^W].
struct ProjectionCase {
  std::string id;
  Integrand theta;  ///< raw integrand (may read B)
  /// F as a function of the terminal values (B_1, W_1).
  std::function<double(std::span<const double> B1, std::span<const double> W1)> F;
  Integrand projector;  ///< E[F theta_r | F^W], without the factor below
  /// Part of F that is F^W-measurable and is pulled out of the projection.
  std::function<double(std::span<const double> W1)> outer;
  /// Limit conditional variance given W.
  std::function<double(std::span<const double> W1)> conditional_variance;
};

/// "F1_theta1" (F = 1, theta = 1), "FB1_thetaB" (F = B_1, theta = B),
/// "FW1_theta1" (F = W_1, theta = 1).
std::vector<ProjectionCase> projection_catalog();
const ProjectionCase& find_case(const std::string& id);

/// sqrt(n) E[F int int theta dW dW | F_1^W] through the case's projector.
double conditional_double_integral(const ProjectionCase& c, const BrownianLattice& lattice,
                                   std::size_t n);

struct NestedComparison {
  double projected = 0.0;
  double nested_mean = 0.0;
  double nested_se = 0.0;
};

/// Holds W of `lattice` fixed and averages F * sqrt(n) int int theta dW dW
/// over `inner` fresh B paths.
NestedComparison nested_conditional(const ProjectionCase& c, const BrownianLattice& lattice,
                                    std::size_t n, std::size_t inner, std::uint64_t seed);

/// n int_0^1 (int_eta^s a dW^i)(int_eta^s b dW^j) ds, trapezoid rule on the
/// fine grid using the left and right limits inside each cell.
double qv_statistic(const BrownianLattice& lattice, const Integrand& a, const Integrand& b,
                    std::size_t i, std::size_t j, std::size_t n);

struct LimitRow {
  std::string case_id;
  std::size_t n = 0;
  std::string statistic;
  double value = 0.0;
  double std_error = 0.0;
  double predicted = 0.0;
  bool pass = false;
};

/// Mean of qv_statistic over `paths` lattices (d = 2) for each level.
std::vector<LimitRow> qv_limit_check(std::size_t n_fine, std::size_t paths, std::uint64_t seed,
                                     const Integrand& a, const Integrand& b, std::size_t i,
                                     std::size_t j, std::span<const std::size_t> ladder,
                                     double predicted, double tolerance);

/// Conditional expectations sqrt(n) E[F int int theta dX dY | F_1^W] with
/// at least one of X, Y equal to B, in closed form on the fine grid.
struct ZeroLimitCase {
  std::string id;
  std::function<double(const BrownianLattice&, std::size_t n)> projected;
  /// F * sqrt(n) int int dX dY for one (B, W) pair; its B-average equals
  /// `projected`.
  std::function<double(const BrownianLattice&, std::size_t n)> raw;
};

/// "F1_dBdW" (0), "FB1_dBdW" (sqrt(n) int (s - eta) dW), "FB1_dBdB" (0),
/// "FB1sq_dBdB" (1 / sqrt(n)).
std::vector<ZeroLimitCase> zero_limit_catalog();
const ZeroLimitCase& find_zero_case(const std::string& id);

struct ZeroLimitTable {
  std::vector<LimitRow> rows;  ///< mean |projected| per level
  std::vector<std::vector<double>> samples;
  double slope = 0.0;
  double slope_se = 0.0;
};

ZeroLimitTable zero_limit_check(const ZeroLimitCase& c, std::size_t n_fine, std::size_t paths,
                                std::uint64_t seed, std::span<const std::size_t> ladder);

enum class FubiniCase { w_path, b_path, b_squared };
std::string to_string(FubiniCase c);

struct FubiniResult {
  std::string case_id;
  double mean_discrepancy = 0.0;
  double std_error = 0.0;
  std::size_t outer = 0;
  bool pass = false;
};

/// E[int f dW | F_1^W] by projecting first (f = W: W, f = B: 0, f = B^2: s)
/// and by nested Monte Carlo over B on a `steps`-step grid.
FubiniResult fubini_check(FubiniCase c, std::size_t outer_paths, std::size_t inner_paths,
                          std::uint64_t seed, std::size_t steps = 4, double sigmas = 3.0);

/// L2 norms of sqrt(n) int (A_s - A_eta) dM_s and sqrt(n) int (M_s - M_eta) dA_s
/// for A_t = t and M = W (a = b = 1). Exact value 1 / sqrt(3n) for both.
struct L2Row {
  std::size_t n = 0;
  double l2_A_dM = 0.0;
  double l2_M_dA = 0.0;
  double predicted = 0.0;
};

std::vector<L2Row> zero_convergence_table(std::size_t n_fine, std::size_t paths,
                                          std::uint64_t seed, std::span<const std::size_t> ladder);

/// Weight functionals of W_1 used by the stability checks.
enum class StableWeight { one, positive_part, exponential };
std::string to_string(StableWeight w);
double stable_weight(StableWeight w, double W1);
/// E[weight(W_1)] for a standard normal W_1.
double stable_weight_mean(StableWeight w);

/// The three bounded Lipschitz test functions of the stability checks.
struct TestFn {
  std::string id;
  std::function<double(double)> f;
};
std::vector<TestFn> stable_test_functions();

}  // namespace filterlab
