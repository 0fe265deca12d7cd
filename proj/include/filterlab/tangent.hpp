#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "filterlab/euler.hpp"
#include "filterlab/lattice.hpp"
#include "filterlab/model.hpp"

namespace filterlab {

inline constexpr std::size_t kMaxFlowDim = 6;

/// (e+1) x (e+1) matrix with stack storage.
using FlowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxFlowDim, kMaxFlowDim>;

/// Generator G of one Euler step E_{k+1} = (I + G) E_k of the tangent flow for
/// the state augmented by the log-weight. Rows 0..e-1 carry the derivatives of
/// b dt + sigma dB + v dY; row e carries those of h.dY - |h|^2 dt / 2; column e
/// is zero. `c` must hold derivatives.
void tangent_generator(const Coefficients& c, double dt, std::span<const double> dB,
                       std::span<const double> dY, FlowMatrix& G);

/// One Euler step of the tangent flow at (x, y).
FlowMatrix tangent_step(const FilterModel& model, std::span<const double> x,
                        std::span<const double> y, const FlowMatrix& E, double dt,
                        std::span<const double> dB, std::span<const double> dY);

struct TangentFlow {
  std::size_t n = 0;
  std::vector<FlowMatrix> E;      ///< n + 1 matrices at grid times k/n
  std::vector<FlowMatrix> E_inv;  ///< filled by inverse_flow
  std::vector<double> rcond;      ///< reciprocal condition estimates
  std::size_t flagged = 0;        ///< matrices whose inverse was rejected
};

/// Tangent flow along `path` (at its own level) with step-major increments
/// dB (n x e) and dY (n x d) at that level.
TangentFlow tangent_flow(const FilterModel& model, const EulerTrajectory& path,
                         std::span<const double> dB, std::span<const double> dY);

/// LU inverse of every matrix. Returns true when all reciprocal condition
/// estimates exceed `rcond_floor`.
bool inverse_flow(TangentFlow& flow, double rcond_floor = 1e-12);

/// f^{ijk''} stored at (k''*d + i)*d + j for k'' in [0, e].
/// Rows k'' < e: sum_l d_{x_l} v_{k''i} v_{lj} + d_{y_j} v_{k''i};
/// row e: sum_l d_{x_l} h_i v_{lj} + d_{y_j} h_i.
void f_coeff(const Coefficients& c, std::span<double> out);

/// Scheme-I integrand a^{ij} = sum_k d_{x_k} h_i v_{kj} + d_{y_j} h_i at [i*d + j].
void scheme_one_integrand(const Coefficients& c, std::span<double> out);

enum class SignConvention { minus, plus };

std::string to_string(SignConvention s);
SignConvention parse_sign_convention(const std::string& s);

/// Grid function on the fine grid with the limit variance it induces.
struct VarianceEstimate {
  std::size_t n_fine = 0;
  std::size_t d = 0;
  std::vector<double> u;  ///< (n_fine + 1) x d x d
  double V_hat = 0.0;
  double V_hat_stderr = 0.0;
  std::size_t particles = 0;
  std::size_t excluded = 0;
  bool normalized = false;
  SignConvention sign = SignConvention::minus;
};

/// 1/2 sum_{ij} int_0^1 u^2 ds by the trapezoid rule on every `stride`-th
/// fine grid point.
double trapezoid_variance(std::span<const double> u, std::size_t n_fine, std::size_t d,
                          std::size_t stride = 1);

/// Synthetic linear equation used to check the variation-of-constants
/// representation: q = 1, Z = (t, B, Y) and
///   a^t(s) = a_dt cos(2 pi s), a^B(s) = a_dB + a_dB_osc sin(B_s), a^Y = a_dY,
///   G_t = g_t t + g_B B_t + g_Y Y_t.
struct VocParams {
  double a_dt = 0.5;
  double a_dB = 0.4;
  double a_dB_osc = 0.2;
  double a_dY = 0.3;
  double g_t = 0.5;
  double g_B = 0.7;
  double g_Y = -0.4;
};

/// |phi_1(direct Euler) - phi_1(representation)| on one lattice at level n.
double variation_of_constants_residual(const BrownianLattice& lattice, std::size_t n,
                                       const VocParams& params = {});

struct VocCheck {
  std::vector<std::size_t> n_fine;
  std::vector<double> rms_residual;
  double slope = 0.0;
};

/// RMS residual over `paths` lattices for each level; all levels coarsen the
/// same lattice of size max(levels).
VocCheck variation_of_constants_check(std::span<const std::size_t> levels, std::size_t paths,
                                      std::uint64_t seed, const VocParams& params = {});

}  // namespace filterlab
