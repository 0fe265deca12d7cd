#include "filterlab/tangent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "filterlab/error.hpp"
#include "filterlab/stats.hpp"

namespace filterlab {

void tangent_generator(const Coefficients& c, double dt, std::span<const double> dB,
                       std::span<const double> dY, FlowMatrix& G) {
  const std::size_t e = c.e, d = c.d;
  G.setZero(e + 1, e + 1);
  for (std::size_t i = 0; i < e; ++i) {
    for (std::size_t k = 0; k < e; ++k) {
      double acc = c.db_dx[i * e + k] * dt;
      for (std::size_t l = 0; l < e; ++l) acc += c.dsigma_dx[(i * e + l) * e + k] * dB[l];
      for (std::size_t l = 0; l < d; ++l) acc += c.dv_dx[(i * d + l) * e + k] * dY[l];
      G(i, k) = acc;
    }
  }
  for (std::size_t k = 0; k < e; ++k) {
    double acc = 0.0;
    for (std::size_t l = 0; l < d; ++l) {
      const double dh = c.dh_dx[l * e + k];
      acc += dh * dY[l] - c.h[l] * dh * dt;
    }
    G(e, k) = acc;
  }
}

FlowMatrix tangent_step(const FilterModel& model, std::span<const double> x,
                        std::span<const double> y, const FlowMatrix& E, double dt,
                        std::span<const double> dB, std::span<const double> dY) {
  Coefficients c(model.e(), model.d());
  model.evaluate(x, y, c, true);
  FlowMatrix G;
  tangent_generator(c, dt, dB, dY, G);
  FlowMatrix next = E;
  next.noalias() += G * E;
  for (Eigen::Index i = 0; i < next.size(); ++i) {
    if (!std::isfinite(next.data()[i])) throw IntegrationError("non-finite tangent flow", 0);
  }
  return next;
}

TangentFlow tangent_flow(const FilterModel& model, const EulerTrajectory& path,
                         std::span<const double> dB, std::span<const double> dY) {
  const std::size_t e = model.e(), d = model.d(), n = path.n;
  if (e + 1 > kMaxFlowDim) throw ConfigError("signal dimension too large for the tangent flow");
  if (dB.size() != n * e || dY.size() != n * d) {
    throw ConfigError("increments do not match the trajectory level");
  }
  TangentFlow flow;
  flow.n = n;
  flow.E.resize(n + 1);
  flow.E[0] = FlowMatrix::Identity(e + 1, e + 1);
  const double dt = 1.0 / static_cast<double>(n);
  Coefficients c(e, d);
  FlowMatrix G;
  for (std::size_t k = 0; k < n; ++k) {
    model.evaluate(path.state_at(k), path.y_at(k), c, true);
    tangent_generator(c, dt, dB.subspan(k * e, e), dY.subspan(k * d, d), G);
    flow.E[k + 1] = flow.E[k];
    flow.E[k + 1].noalias() += G * flow.E[k];
    for (Eigen::Index i = 0; i < flow.E[k + 1].size(); ++i) {
      if (!std::isfinite(flow.E[k + 1].data()[i])) {
        throw IntegrationError("non-finite tangent flow", k);
      }
    }
  }
  return flow;
}

bool inverse_flow(TangentFlow& flow, double rcond_floor) {
  flow.E_inv.resize(flow.E.size());
  flow.rcond.resize(flow.E.size());
  flow.flagged = 0;
  for (std::size_t k = 0; k < flow.E.size(); ++k) {
    Eigen::PartialPivLU<FlowMatrix> lu(flow.E[k]);
    flow.rcond[k] = lu.rcond();
    if (!(flow.rcond[k] > rcond_floor)) {
      ++flow.flagged;
      flow.E_inv[k].setZero(flow.E[k].rows(), flow.E[k].cols());
      continue;
    }
    flow.E_inv[k] = lu.inverse();
  }
  return flow.flagged == 0;
}

void f_coeff(const Coefficients& c, std::span<double> out) {
  const std::size_t e = c.e, d = c.d;
  for (std::size_t kk = 0; kk < e; ++kk) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double acc = c.dv_dy[(kk * d + i) * d + j];
        for (std::size_t l = 0; l < e; ++l) acc += c.dv_dx[(kk * d + i) * e + l] * c.v[l * d + j];
        out[(kk * d + i) * d + j] = acc;
      }
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double acc = c.dh_dy[i * d + j];
      for (std::size_t l = 0; l < e; ++l) acc += c.dh_dx[i * e + l] * c.v[l * d + j];
      out[(e * d + i) * d + j] = acc;
    }
  }
}

void scheme_one_integrand(const Coefficients& c, std::span<double> out) {
  // Column-oriented: accumulate v^T (grad_x h)^T then add the y-gradient.
  const std::size_t e = c.e, d = c.d;
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(d * d), 0.0);
  for (std::size_t k = 0; k < e; ++k) {
    for (std::size_t j = 0; j < d; ++j) {
      const double vkj = c.v[k * d + j];
      if (vkj == 0.0) continue;
      for (std::size_t i = 0; i < d; ++i) out[i * d + j] += vkj * c.dh_dx[i * e + k];
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] += c.dh_dy[i * d + j];
  }
}

std::string to_string(SignConvention s) { return s == SignConvention::minus ? "minus" : "plus"; }

SignConvention parse_sign_convention(const std::string& s) {
  if (s == "minus" || s == "-") return SignConvention::minus;
  if (s == "plus" || s == "+") return SignConvention::plus;
  throw ConfigError("sign_convention must be 'minus' or 'plus', got '" + s + "'");
}

double trapezoid_variance(std::span<const double> u, std::size_t n_fine, std::size_t d,
                          std::size_t stride) {
  if (stride == 0 || n_fine % stride != 0) throw ConfigError("stride must divide n_fine");
  const std::size_t dd = d * d;
  if (u.size() != (n_fine + 1) * dd) throw ConfigError("grid function has the wrong size");
  const std::size_t m = n_fine / stride;
  const double h = 1.0 / static_cast<double>(m);
  NeumaierSum sum;
  for (std::size_t k = 0; k <= m; ++k) {
    const double w = (k == 0 || k == m) ? 0.5 : 1.0;
    double sq = 0.0;
    for (std::size_t ij = 0; ij < dd; ++ij) {
      const double v = u[k * stride * dd + ij];
      sq += v * v;
    }
    sum.add(w * sq);
  }
  return 0.5 * h * sum.value();
}

double variation_of_constants_residual(const BrownianLattice& lattice, std::size_t n,
                                       const VocParams& p) {
  if (lattice.e != 1 || lattice.d != 1) throw ConfigError("check uses a scalar lattice");
  const std::vector<double> dB = coarsen(lattice.dB, 1, lattice.n_fine, n);
  const std::vector<double> dY = coarsen(lattice.dW, 1, lattice.n_fine, n);
  const double dt = 1.0 / static_cast<double>(n);

  double phi = 0.0;
  double psi = 1.0;
  NeumaierSum integral;
  double B = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = static_cast<double>(k) * dt;
    const double a_t = p.a_dt * std::cos(2.0 * std::numbers::pi * s);
    const double a_B = p.a_dB + p.a_dB_osc * std::sin(B);
    const double A = a_t * dt + a_B * dB[k] + p.a_dY * dY[k];
    const double dG = p.g_t * dt + p.g_B * dB[k] + p.g_Y * dY[k];
    const double bracket = a_B * p.g_B * dt + p.a_dY * p.g_Y * dt;
    integral.add((dG - bracket) / psi);
    phi += phi * A + dG;
    psi *= 1.0 + A;
    B += dB[k];
  }
  return std::abs(phi - psi * integral.value());
}

VocCheck variation_of_constants_check(std::span<const std::size_t> levels, std::size_t paths,
                                      std::uint64_t seed, const VocParams& params) {
  if (levels.empty() || paths == 0) throw ConfigError("empty variation-of-constants check");
  std::size_t top = 0;
  for (std::size_t n : levels) top = std::max(top, n);
  VocCheck out;
  out.n_fine.assign(levels.begin(), levels.end());
  std::vector<NeumaierSum> sq(levels.size());
  for (std::size_t p = 0; p < paths; ++p) {
    const BrownianLattice lattice = sample_lattice(1, 1, top, seed, p);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const double r = variation_of_constants_residual(lattice, levels[i], params);
      sq[i].add(r * r);
    }
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    out.rms_residual.push_back(std::sqrt(sq[i].value() / static_cast<double>(paths)));
    lx.push_back(std::log2(static_cast<double>(levels[i])));
    ly.push_back(std::log2(out.rms_residual.back()));
  }
  if (levels.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(ly.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    out.slope = sxy / sxx;
  }
  return out;
}

}  // namespace filterlab
