#include "filterlab/limit_lab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "filterlab/error.hpp"
#include "filterlab/rng.hpp"
#include "filterlab/stats.hpp"

namespace filterlab {

Integrand Integrand::constant(double c) {
  Integrand f;
  f.kind_ = Kind::constant;
  f.value_ = c;
  return f;
}

Integrand Integrand::time() {
  Integrand f;
  f.kind_ = Kind::time;
  return f;
}

Integrand Integrand::b_path(std::size_t l) {
  Integrand f;
  f.kind_ = Kind::b_path;
  f.index_ = l;
  return f;
}

Integrand Integrand::w_path(std::size_t l) {
  Integrand f;
  f.kind_ = Kind::w_path;
  f.index_ = l;
  return f;
}

Integrand Integrand::custom(Fn fn) {
  Integrand f;
  f.kind_ = Kind::custom;
  f.fn_ = std::move(fn);
  return f;
}

namespace {

void require_level(const BrownianLattice& lattice, std::size_t n) {
  if (n == 0 || lattice.n_fine % n != 0) {
    throw ConfigError("level " + std::to_string(n) + " does not divide n_fine " +
                      std::to_string(lattice.n_fine));
  }
}

std::vector<double> terminal(std::span<const double> incr, std::size_t dim) {
  std::vector<double> out(dim, 0.0);
  for (std::size_t k = 0; k < incr.size(); ++k) out[k % dim] += incr[k];
  return out;
}

}  // namespace

double double_integral(const BrownianLattice& lattice, const Integrand& theta, std::size_t n,
                       std::size_t i, std::size_t j, const Integrand& lambda) {
  require_level(lattice, n);
  const std::size_t e = lattice.e, d = lattice.d, N = lattice.n_fine, m = N / n;
  if (i >= d || j >= d) throw ConfigError("double_integral: coordinate out of range");
  const double dt = lattice.dt();
  std::vector<double> B(e, 0.0), W(d, 0.0);
  double inner = 0.0;
  NeumaierSum acc;
  for (std::size_t k = 0; k < N; ++k) {
    if (k % m == 0) inner = 0.0;
    const double t = static_cast<double>(k) * dt;
    const double th = theta(t, B, W);
    const double la = lambda(t, B, W);
    const double dWi = lattice.dW[k * d + i];
    const double dWj = lattice.dW[k * d + j];
    double step = inner * dWi;
    if (i == j) step += th * 0.5 * (dWj * dWj - dt);
    acc.add(la * step);
    inner += th * dWj;
    for (std::size_t l = 0; l < e; ++l) B[l] += lattice.dB[k * e + l];
    for (std::size_t l = 0; l < d; ++l) W[l] += lattice.dW[k * d + l];
  }
  return std::sqrt(static_cast<double>(n)) * acc.value();
}

std::vector<ProjectionCase> projection_catalog() {
  std::vector<ProjectionCase> cases;
  {
    ProjectionCase c;
    c.id = "F1_theta1";
    c.theta = Integrand::constant(1.0);
    c.F = [](std::span<const double>, std::span<const double>) { return 1.0; };
    c.projector = Integrand::constant(1.0);
    c.outer = [](std::span<const double>) { return 1.0; };
    c.conditional_variance = [](std::span<const double>) { return 0.5; };
    cases.push_back(std::move(c));
  }
  {
    // E[B_1 B_r | F^W] = r
    ProjectionCase c;
    c.id = "FB1_thetaB";
    c.theta = Integrand::b_path(0);
    c.F = [](std::span<const double> B1, std::span<const double>) { return B1[0]; };
    c.projector = Integrand::time();
    c.outer = [](std::span<const double>) { return 1.0; };
    c.conditional_variance = [](std::span<const double>) { return 1.0 / 6.0; };
    cases.push_back(std::move(c));
  }
  {
    ProjectionCase c;
    c.id = "FW1_theta1";
    c.theta = Integrand::constant(1.0);
    c.F = [](std::span<const double>, std::span<const double> W1) { return W1[0]; };
    c.projector = Integrand::constant(1.0);
    c.outer = [](std::span<const double> W1) { return W1[0]; };
    c.conditional_variance = [](std::span<const double> W1) { return 0.5 * W1[0] * W1[0]; };
    cases.push_back(std::move(c));
  }
  return cases;
}

const ProjectionCase& find_case(const std::string& id) {
  static const std::vector<ProjectionCase> catalog = projection_catalog();
  for (const auto& c : catalog) {
    if (c.id == id) return c;
  }
  throw ConfigError("unknown limit case '" + id + "'");
}

double conditional_double_integral(const ProjectionCase& c, const BrownianLattice& lattice,
                                   std::size_t n) {
  const std::vector<double> W1 = terminal(lattice.dW, lattice.d);
  return c.outer(W1) * double_integral(lattice, c.projector, n, 0, 0);
}

NestedComparison nested_conditional(const ProjectionCase& c, const BrownianLattice& lattice,
                                    std::size_t n, std::size_t inner, std::uint64_t seed) {
  if (inner < 2) throw ConfigError("nested Monte Carlo needs at least 2 inner paths");
  NestedComparison out;
  out.projected = conditional_double_integral(c, lattice, n);
  const std::vector<double> W1 = terminal(lattice.dW, lattice.d);
  BrownianLattice copy = lattice;
  const double scale = std::sqrt(lattice.dt());
  std::vector<double> values(inner);
  for (std::size_t r = 0; r < inner; ++r) {
    NormalStream rng(derive_seed(seed, Stream::inner, lattice.path_index, r));
    rng.fill(copy.dB, scale);
    const std::vector<double> B1 = terminal(copy.dB, copy.e);
    values[r] = c.F(B1, W1) * double_integral(copy, c.theta, n, 0, 0);
  }
  const Moments m = moments(values);
  out.nested_mean = m.mean;
  out.nested_se = m.mean_se;
  return out;
}

double qv_statistic(const BrownianLattice& lattice, const Integrand& a, const Integrand& b,
                    std::size_t i, std::size_t j, std::size_t n) {
  require_level(lattice, n);
  const std::size_t e = lattice.e, d = lattice.d, N = lattice.n_fine, m = N / n;
  if (i >= d || j >= d) throw ConfigError("qv_statistic: coordinate out of range");
  const double dt = lattice.dt();
  std::vector<double> B(e, 0.0), W(d, 0.0);
  double I = 0.0, J = 0.0;
  NeumaierSum acc;
  for (std::size_t k = 0; k < N; ++k) {
    if (k % m == 0) {
      I = 0.0;
      J = 0.0;
    }
    const double t = static_cast<double>(k) * dt;
    const double left = I * J;
    I += a(t, B, W) * lattice.dW[k * d + i];
    J += b(t, B, W) * lattice.dW[k * d + j];
    acc.add(0.5 * (left + I * J) * dt);
    for (std::size_t l = 0; l < e; ++l) B[l] += lattice.dB[k * e + l];
    for (std::size_t l = 0; l < d; ++l) W[l] += lattice.dW[k * d + l];
  }
  return static_cast<double>(n) * acc.value();
}

std::vector<LimitRow> qv_limit_check(std::size_t n_fine, std::size_t paths, std::uint64_t seed,
                                     const Integrand& a, const Integrand& b, std::size_t i,
                                     std::size_t j, std::span<const std::size_t> ladder,
                                     double predicted, double tolerance) {
  const std::size_t d = std::max(i, j) + 1;
  std::vector<std::vector<double>> values(ladder.size(), std::vector<double>(paths));
  for (std::size_t p = 0; p < paths; ++p) {
    const BrownianLattice lattice = sample_lattice(1, d, n_fine, seed, p);
    for (std::size_t l = 0; l < ladder.size(); ++l) {
      values[l][p] = qv_statistic(lattice, a, b, i, j, ladder[l]);
    }
  }
  std::vector<LimitRow> rows;
  for (std::size_t l = 0; l < ladder.size(); ++l) {
    const Moments m = moments(values[l]);
    LimitRow row;
    row.case_id = "qv_" + std::to_string(i) + std::to_string(j);
    row.n = ladder[l];
    row.statistic = "mean";
    row.value = m.mean;
    row.std_error = m.mean_se;
    row.predicted = predicted;
    row.pass = std::abs(m.mean - predicted) <= tolerance;
    rows.push_back(row);
  }
  return rows;
}

namespace {

/// sqrt(n) sum_k inner_k dY_k with inner_k = X_{t_k} - X_{eta(t_k)}; on
/// the diagonal X = Y the Ito term ((dY)^2 - dt)/2 is added per step.
double fine_double(std::span<const double> dX, std::span<const double> dY, std::size_t N,
                   std::size_t n, bool diagonal) {
  const std::size_t m = N / n;
  const double dt = 1.0 / static_cast<double>(N);
  double inner = 0.0;
  NeumaierSum acc;
  for (std::size_t k = 0; k < N; ++k) {
    if (k % m == 0) inner = 0.0;
    double step = inner * dY[k];
    if (diagonal) step += 0.5 * (dY[k] * dY[k] - dt);
    acc.add(step);
    inner += dX[k];
  }
  return std::sqrt(static_cast<double>(n)) * acc.value();
}

std::vector<double> first_coordinate(std::span<const double> incr, std::size_t dim) {
  std::vector<double> out(incr.size() / dim);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = incr[k * dim];
  return out;
}

double b1(const BrownianLattice& l) {
  double s = 0.0;
  for (std::size_t k = 0; k < l.n_fine; ++k) s += l.dB[k * l.e];
  return s;
}

}  // namespace

std::vector<ZeroLimitCase> zero_limit_catalog() {
  std::vector<ZeroLimitCase> cases;
  cases.push_back({"F1_dBdW", [](const BrownianLattice&, std::size_t) { return 0.0; },
                   [](const BrownianLattice& l, std::size_t n) {
                     return fine_double(first_coordinate(l.dB, l.e), first_coordinate(l.dW, l.d),
                                        l.n_fine, n, false);
                   }});
  cases.push_back({"FB1_dBdW",
                   [](const BrownianLattice& l, std::size_t n) {
                     require_level(l, n);
                     const std::size_t m = l.n_fine / n;
                     const double dt = l.dt();
                     NeumaierSum acc;
                     for (std::size_t k = 0; k < l.n_fine; ++k) {
                       acc.add(static_cast<double>(k % m) * dt * l.dW[k * l.d]);
                     }
                     return std::sqrt(static_cast<double>(n)) * acc.value();
                   },
                   [](const BrownianLattice& l, std::size_t n) {
                     return b1(l) * fine_double(first_coordinate(l.dB, l.e),
                                                first_coordinate(l.dW, l.d), l.n_fine, n, false);
                   }});
  cases.push_back({"FB1_dBdB", [](const BrownianLattice&, std::size_t) { return 0.0; },
                   [](const BrownianLattice& l, std::size_t n) {
                     const std::vector<double> dB = first_coordinate(l.dB, l.e);
                     return b1(l) * fine_double(dB, dB, l.n_fine, n, true);
                   }});
  // E[B_1^2 sum_cells ((dB_cell)^2 - 1/n) / 2] = n * (1/n^2) = 1/n.
  cases.push_back({"FB1sq_dBdB",
                   [](const BrownianLattice&, std::size_t n) {
                     return 1.0 / std::sqrt(static_cast<double>(n));
                   },
                   [](const BrownianLattice& l, std::size_t n) {
                     const std::vector<double> dB = first_coordinate(l.dB, l.e);
                     const double b = b1(l);
                     return b * b * fine_double(dB, dB, l.n_fine, n, true);
                   }});
  return cases;
}

const ZeroLimitCase& find_zero_case(const std::string& id) {
  static const std::vector<ZeroLimitCase> catalog = zero_limit_catalog();
  for (const auto& c : catalog) {
    if (c.id == id) return c;
  }
  throw ConfigError("unknown zero-limit case '" + id + "'");
}

ZeroLimitTable zero_limit_check(const ZeroLimitCase& c, std::size_t n_fine, std::size_t paths,
                                std::uint64_t seed, std::span<const std::size_t> ladder) {
  ZeroLimitTable table;
  table.samples.assign(ladder.size(), std::vector<double>(paths));
  for (std::size_t p = 0; p < paths; ++p) {
    const BrownianLattice lattice = sample_lattice(1, 1, n_fine, seed, p);
    for (std::size_t l = 0; l < ladder.size(); ++l) {
      table.samples[l][p] = c.projected(lattice, ladder[l]);
    }
  }
  for (std::size_t l = 0; l < ladder.size(); ++l) {
    std::vector<double> a(paths);
    for (std::size_t p = 0; p < paths; ++p) a[p] = std::abs(table.samples[l][p]);
    LimitRow row;
    row.case_id = c.id;
    row.n = ladder[l];
    row.statistic = "mean_abs";
    if (paths >= 2) {
      const Moments m = moments(a);
      row.value = m.mean;
      row.std_error = m.mean_se;
    } else {
      row.value = a.empty() ? 0.0 : a[0];
    }
    table.rows.push_back(row);
  }
  bool positive = ladder.size() >= 2;
  for (const auto& row : table.rows) positive = positive && row.value > 0.0;
  if (positive && ladder.size() >= 4 && paths >= 2) {
    std::vector<double> lv(ladder.begin(), ladder.end());
    const RateFit fit = rate_regression(lv, table.samples, seed);
    table.slope = fit.slope;
    table.slope_se = fit.slope_se;
  }
  return table;
}

std::string to_string(FubiniCase c) {
  switch (c) {
    case FubiniCase::w_path:
      return "f_W";
    case FubiniCase::b_path:
      return "f_B";
    case FubiniCase::b_squared:
      return "f_B2";
  }
  return "?";
}

FubiniResult fubini_check(FubiniCase c, std::size_t outer_paths, std::size_t inner_paths,
                          std::uint64_t seed, std::size_t steps, double sigmas) {
  if (outer_paths < 2 || inner_paths < 2) throw ConfigError("fubini_check needs >= 2 paths");
  const double dt = 1.0 / static_cast<double>(steps);
  const double scale = std::sqrt(dt);
  std::vector<double> delta(outer_paths);
  std::vector<double> dB(steps);
  for (std::size_t o = 0; o < outer_paths; ++o) {
    NormalStream wrng(derive_seed(seed, Stream::observation_noise, o));
    std::vector<double> dW(steps), W(steps + 1, 0.0);
    wrng.fill(dW, scale);
    for (std::size_t k = 0; k < steps; ++k) W[k + 1] = W[k] + dW[k];

    NeumaierSum projected;
    for (std::size_t k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      switch (c) {
        case FubiniCase::w_path:
          projected.add(W[k] * dW[k]);
          break;
        case FubiniCase::b_path:
          break;
        case FubiniCase::b_squared:
          projected.add(t * dW[k]);
          break;
      }
    }

    NeumaierSum nested;
    for (std::size_t r = 0; r < inner_paths; ++r) {
      NormalStream brng(derive_seed(seed, Stream::inner, o, r));
      brng.fill(dB, scale);
      double B = 0.0;
      NeumaierSum integral;
      for (std::size_t k = 0; k < steps; ++k) {
        double f = 0.0;
        switch (c) {
          case FubiniCase::w_path:
            f = W[k];
            break;
          case FubiniCase::b_path:
            f = B;
            break;
          case FubiniCase::b_squared:
            f = B * B;
            break;
        }
        integral.add(f * dW[k]);
        B += dB[k];
      }
      nested.add(integral.value());
    }
    delta[o] = nested.value() / static_cast<double>(inner_paths) - projected.value();
  }
  const Moments m = moments(delta);
  FubiniResult out;
  out.case_id = to_string(c);
  out.mean_discrepancy = m.mean;
  out.std_error = m.mean_se;
  out.outer = outer_paths;
  out.pass = std::abs(m.mean) <= sigmas * m.mean_se || std::abs(m.mean) <= 1e-14;
  return out;
}

std::vector<L2Row> zero_convergence_table(std::size_t n_fine, std::size_t paths,
                                          std::uint64_t seed, std::span<const std::size_t> ladder) {
  std::vector<NeumaierSum> sq_a(ladder.size()), sq_m(ladder.size());
  for (std::size_t p = 0; p < paths; ++p) {
    const BrownianLattice lattice = sample_lattice(1, 1, n_fine, seed, p);
    const double dt = lattice.dt();
    for (std::size_t l = 0; l < ladder.size(); ++l) {
      const std::size_t n = ladder[l];
      require_level(lattice, n);
      const std::size_t m = n_fine / n;
      NeumaierSum a_dm, m_da;
      double w_rel = 0.0;
      for (std::size_t k = 0; k < n_fine; ++k) {
        if (k % m == 0) w_rel = 0.0;
        const double dW = lattice.dW[k];
        a_dm.add(static_cast<double>(k % m) * dt * dW);
        m_da.add((w_rel + 0.5 * dW) * dt);
        w_rel += dW;
      }
      const double root_n = std::sqrt(static_cast<double>(n));
      sq_a[l].add(root_n * root_n * a_dm.value() * a_dm.value());
      sq_m[l].add(root_n * root_n * m_da.value() * m_da.value());
    }
  }
  std::vector<L2Row> rows;
  for (std::size_t l = 0; l < ladder.size(); ++l) {
    L2Row row;
    row.n = ladder[l];
    row.l2_A_dM = std::sqrt(sq_a[l].value() / static_cast<double>(paths));
    row.l2_M_dA = std::sqrt(sq_m[l].value() / static_cast<double>(paths));
    row.predicted = 1.0 / std::sqrt(3.0 * static_cast<double>(ladder[l]));
    rows.push_back(row);
  }
  return rows;
}

std::string to_string(StableWeight w) {
  switch (w) {
    case StableWeight::one:
      return "one";
    case StableWeight::positive_part:
      return "indicator_W1_pos";
    case StableWeight::exponential:
      return "exp_W1";
  }
  return "?";
}

double stable_weight(StableWeight w, double W1) {
  switch (w) {
    case StableWeight::one:
      return 1.0;
    case StableWeight::positive_part:
      return W1 > 0.0 ? 1.0 : 0.0;
    case StableWeight::exponential:
      return std::exp(W1 - 0.5);
  }
  return 0.0;
}

double stable_weight_mean(StableWeight w) {
  return w == StableWeight::positive_part ? 0.5 : 1.0;
}

std::vector<TestFn> stable_test_functions() {
  return {{"cos", [](double x) { return std::cos(x); }},
          {"tanh", [](double x) { return std::tanh(x); }},
          {"cauchy", [](double x) { return 1.0 / (1.0 + x * x); }}};
}

}  // namespace filterlab
