#include "filterlab/filter.hpp"

#include <algorithm>
#include <cmath>

#include "filterlab/error.hpp"
#include "filterlab/rng.hpp"
#include "filterlab/stats.hpp"
#include "filterlab/tangent.hpp"

namespace filterlab {

std::string to_string(WeightScheme s) {
  switch (s) {
    case WeightScheme::reference:
      return "reference";
    case WeightScheme::scheme_I:
      return "I";
    case WeightScheme::scheme_II:
      return "II";
  }
  return "?";
}

WeightScheme parse_weight_scheme(const std::string& s) {
  if (s == "reference") return WeightScheme::reference;
  if (s == "I" || s == "1") return WeightScheme::scheme_I;
  if (s == "II" || s == "2") return WeightScheme::scheme_II;
  throw ConfigError("scheme must be 'reference', 'I' or 'II', got '" + s + "'");
}

double log_weight(const FilterModel& model, std::span<const double> x_states,
                  std::size_t x_steps, const ObservationPath& y, std::size_t n) {
  const std::size_t e = model.e(), d = model.d();
  if (y.d != d || x_states.size() != (x_steps + 1) * e) {
    throw ConfigError("log_weight: dimension mismatch");
  }
  if (n == 0 || x_steps % n != 0 || y.n_fine % n != 0) {
    throw ConfigError("log_weight: level must divide both path grids");
  }
  const std::size_t xs = x_steps / n, ys = y.n_fine / n;
  const double dt = 1.0 / static_cast<double>(n);
  Coefficients c(e, d);
  NeumaierSum acc;
  for (std::size_t i = 0; i < n; ++i) {
    model.evaluate(x_states.subspan(i * xs * e, e), y.Y_at(i * ys), c, false);
    for (std::size_t j = 0; j < d; ++j) {
      const double dY = y.Y[(i + 1) * ys * d + j] - y.Y[i * ys * d + j];
      acc.add(c.h[j] * dY - 0.5 * c.h[j] * c.h[j] * dt);
    }
  }
  return acc.value();
}

std::size_t SweepResult::level_index(std::size_t n) const {
  const auto it = std::find(levels.begin(), levels.end(), n);
  if (it == levels.end()) throw ConfigError("level " + std::to_string(n) + " not in the sweep");
  return static_cast<std::size_t>(it - levels.begin());
}

std::uint64_t particle_seed(std::uint64_t seed, std::uint64_t path_index) {
  return derive_seed(seed, Stream::particle, path_index, 0x9a);
}

namespace {

struct LevelObservation {
  std::size_t n;
  std::size_t stride;
  std::vector<double> dY;  // n x d
};

/// Everything one particle path contributes.
struct MemberOutput {
  double log_w_ref = 0.0;
  double g_ref = 0.0;
  std::vector<double> log_w_I, log_w_II, g_II;
  bool flow_ok = true;
};

/// Reciprocal 1-norm condition number of the signal block A of E, using its
/// tracked inverse.
double flow_rcond(const FlowMatrix& E, const FlowMatrix& Ainv) {
  const Eigen::Index e = Ainv.rows();
  const double na = E.topLeftCorner(e, e).cwiseAbs().colwise().sum().maxCoeff();
  const double ni = Ainv.cwiseAbs().colwise().sum().maxCoeff();
  const double r = 1.0 / (na * ni);
  return std::isfinite(r) ? r : 0.0;
}

/// A_{k+1}^{-1} = A_k^{-1} (I + G_A)^{-1} for the signal block of the step.
void step_inverse(const FlowMatrix& G, std::size_t e, FlowMatrix& Ainv) {
  const Eigen::Index n = static_cast<Eigen::Index>(e);
  if (n == 1) {
    Ainv(0, 0) /= 1.0 + G(0, 0);
    return;
  }
  FlowMatrix step = FlowMatrix::Identity(n, n) + G.topLeftCorner(n, n);
  const FlowMatrix inv = step.partialPivLu().inverse();
  const FlowMatrix next = Ainv * inv;
  Ainv = next;
}

class SweepWorker {
 public:
  SweepWorker(const FilterModel& model, const TestFunction& g, const ObservationPath& y,
              const SweepOptions& opt, const std::vector<LevelObservation>& lv)
      : model_(model),
        g_(g),
        y_(y),
        opt_(opt),
        lv_(lv),
        e_(model.e()),
        d_(model.d()),
        N_(y.n_fine),
        c_(e_, d_),
        dB_(N_ * e_),
        dB_anti_(opt.antithetic_level ? N_ * e_ : 0),
        x0_(e_),
        x_(e_),
        x_next_(e_),
        grad_(e_),
        h_((N_ + 1) * d_),
        coarse_dB_(N_ * e_) {
    const std::size_t dd = d_ * d_;
    if (opt.variance_I) a_.resize((N_ + 1) * dd);
    if (opt.variance_II) {
      q_.resize((N_ + 1) * (e_ + 1) * dd);
      f_.resize((e_ + 1) * dd);
    }
    const std::size_t L = lv.size();
    out_.log_w_I.resize(L);
    out_.log_w_II.resize(L);
    out_.g_II.resize(L);
    cvec_.resize(e_ + 1);
    cvec_one_.resize(e_ + 1);
  }

  /// Processes particles [begin, end) writing per-sample values into `r`
  /// and the chunk grids at `chunk`.
  void run_chunk(std::size_t chunk, std::size_t begin, std::size_t end, std::uint64_t seed,
                 SweepResult& r) {
    const std::size_t L = lv_.size();
    const std::size_t G = r.grid_size();
    const bool anti = opt_.antithetic_level != 0;
    const double member_weight = anti ? 0.5 : 1.0;
    double* uIg = opt_.variance_I ? r.uI_g.data() + chunk * G : nullptr;
    double* uI1 = opt_.variance_I ? r.uI_one.data() + chunk * G : nullptr;
    double* uIIg = opt_.variance_II ? r.uII_g.data() + chunk * G : nullptr;
    double* uII1 = opt_.variance_II ? r.uII_one.data() + chunk * G : nullptr;

    for (std::size_t p = begin; p < end; ++p) {
      NormalStream noise(derive_seed(seed, Stream::particle, p, 0));
      NormalStream init(derive_seed(seed, Stream::particle, p, 1));
      noise.fill(dB_, std::sqrt(1.0 / static_cast<double>(N_)));
      model_.sample_initial(init, x0_);
      if (anti) reflect_bridges();

      const int members = anti ? 2 : 1;
      bool failed = false;
      bool flow_ok = true;
      double w_ref = 0.0, gw_ref = 0.0;
      std::vector<double>& wI = tmp_wI_;
      std::vector<double>& gwI = tmp_gwI_;
      std::vector<double>& wII = tmp_wII_;
      std::vector<double>& gwII = tmp_gwII_;
      wI.assign(L, 0.0);
      gwI.assign(L, 0.0);
      wII.assign(L, 0.0);
      gwII.assign(L, 0.0);
      // Grid contributions are staged so a failing second member cannot
      // leave half a pair in the sums.
      staged_.clear();

      for (int m = 0; m < members && !failed; ++m) {
        const std::vector<double>& noise_path = m == 0 ? dB_ : dB_anti_;
        try {
          run_member(noise_path);
        } catch (const IntegrationError&) {
          failed = true;
          break;
        }
        const double wr = std::exp(out_.log_w_ref);
        w_ref += member_weight * wr;
        gw_ref += member_weight * out_.g_ref * wr;
        for (std::size_t l = 0; l < L; ++l) {
          if (opt_.scheme_I) {
            const double w = std::exp(out_.log_w_I[l]);
            wI[l] += member_weight * w;
            gwI[l] += member_weight * out_.g_ref * w;
          }
          if (opt_.scheme_II) {
            const double w = std::exp(out_.log_w_II[l]);
            wII[l] += member_weight * w;
            gwII[l] += member_weight * out_.g_II[l] * w;
          }
        }
        flow_ok = flow_ok && out_.flow_ok;
        if (opt_.variance_I || opt_.variance_II) stage_grids(member_weight * wr);
      }

      r.failed[p] = failed ? 1 : 0;
      if (failed) continue;
      r.w_ref[p] = w_ref;
      r.gw_ref[p] = gw_ref;
      for (std::size_t l = 0; l < L; ++l) {
        r.w_I[p * L + l] = wI[l];
        r.gw_I[p * L + l] = gwI[l];
        r.w_II[p * L + l] = wII[l];
        r.gw_II[p * L + l] = gwII[l];
      }
      if (opt_.variance_I) {
        const std::size_t dd = d_ * d_;
        for (const Staged& s : staged_) {
          for (std::size_t k = 0; k <= N_; ++k) {
            for (std::size_t ij = 0; ij < dd; ++ij) {
              const double a = s.a[k * dd + ij];
              uIg[k * dd + ij] += s.phi * s.g * a;
              uI1[k * dd + ij] += s.phi * a;
            }
          }
        }
        ++r.chunk_used_I[chunk];
      }
      if (opt_.variance_II) {
        r.flow_flagged[p] = flow_ok ? 0 : 1;
        if (flow_ok) {
          const std::size_t dd = d_ * d_;
          const std::size_t E1 = e_ + 1;
          for (const Staged& s : staged_) {
            for (std::size_t k = 0; k <= N_; ++k) {
              const double* qk = s.q.data() + k * E1 * dd;
              for (std::size_t ij = 0; ij < dd; ++ij) {
                double vg = 0.0, v1 = 0.0;
                for (std::size_t kp = 0; kp < E1; ++kp) {
                  vg += s.c[kp] * qk[kp * dd + ij];
                  v1 += s.c_one[kp] * qk[kp * dd + ij];
                }
                uIIg[k * dd + ij] += s.phi * vg;
                uII1[k * dd + ij] += s.phi * v1;
              }
            }
          }
          ++r.chunk_used_II[chunk];
        }
      }
    }
  }

 private:
  struct Staged {
    double phi;
    double g;
    std::vector<double> a;
    std::vector<double> q;
    std::vector<double> c, c_one;
  };

  void stage_grids(double phi) {
    Staged s;
    s.phi = phi;
    s.g = out_.g_ref;
    if (opt_.variance_I) s.a = a_;
    if (opt_.variance_II) {
      s.q = q_;
      s.c = cvec_;
      s.c_one = cvec_one_;
    }
    staged_.push_back(std::move(s));
  }

  /// Within each cell of the antithetic grid, keep the cell increment and
  /// reflect the bridge: dB' = 2 * (cell increment / m) - dB.
  void reflect_bridges() {
    const std::size_t m = N_ / opt_.antithetic_level;
    for (std::size_t cell = 0; cell < opt_.antithetic_level; ++cell) {
      for (std::size_t l = 0; l < e_; ++l) {
        double total = 0.0;
        for (std::size_t k = cell * m; k < (cell + 1) * m; ++k) total += dB_[k * e_ + l];
        const double mean = total / static_cast<double>(m);
        for (std::size_t k = cell * m; k < (cell + 1) * m; ++k) {
          dB_anti_[k * e_ + l] = 2.0 * mean - dB_[k * e_ + l];
        }
      }
    }
  }

  void check_h(std::size_t step) const {
    for (double v : c_.h) {
      if (!std::isfinite(v) || std::abs(v) > opt_.h_bound) {
        throw IntegrationError("observation function out of bounds", step);
      }
    }
  }

  /// Reference path with its weight, optional integrand grids, and the
  /// level-n schemes for one noise path.
  void run_member(const std::vector<double>& dB) {
    const std::size_t e = e_, d = d_, N = N_, dd = d * d, E1 = e + 1;
    const double dt = 1.0 / static_cast<double>(N);
    const bool deriv = opt_.variance_I || opt_.variance_II;
    std::copy(x0_.begin(), x0_.end(), x_.begin());

    FlowMatrix E, G, Ainv;
    if (opt_.variance_II) {
      E = FlowMatrix::Identity(E1, E1);
      Ainv = FlowMatrix::Identity(e, e);
    }
    out_.flow_ok = true;

    NeumaierSum logw;
    for (std::size_t k = 0; k <= N; ++k) {
      const std::span<const double> yk = y_.Y_at(k);
      model_.evaluate(x_, yk, c_, deriv);
      check_h(k);
      std::copy(c_.h.begin(), c_.h.end(), h_.begin() + static_cast<std::ptrdiff_t>(k * d));
      if (opt_.variance_I) scheme_one_integrand(c_, {a_.data() + k * dd, dd});
      if (opt_.variance_II) {
        f_coeff(c_, f_);
        double* qk = q_.data() + k * E1 * dd;
        if (!(flow_rcond(E, Ainv) > opt_.rcond_floor)) {
          out_.flow_ok = false;
          std::fill(qk, qk + E1 * dd, 0.0);
        } else {
          // E = [[A, 0], [r, 1]] so E^{-1} = [[A^{-1}, 0], [-r A^{-1}, 1]].
          for (std::size_t ij = 0; ij < dd; ++ij) {
            double last = f_[e * dd + ij];
            for (std::size_t kp = 0; kp < e; ++kp) {
              double acc = 0.0;
              for (std::size_t kpp = 0; kpp < e; ++kpp) {
                acc += Ainv(static_cast<Eigen::Index>(kp), static_cast<Eigen::Index>(kpp)) *
                       f_[kpp * dd + ij];
              }
              qk[kp * dd + ij] = acc;
              last -= E(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(kp)) * acc;
            }
            qk[e * dd + ij] = last;
          }
        }
      }
      if (k == N) break;

      const std::span<const double> dYk = y_.dY_at(k);
      const std::span<const double> dBk(dB.data() + k * e, e);
      for (std::size_t j = 0; j < d; ++j) {
        logw.add(c_.h[j] * dYk[j] - 0.5 * c_.h[j] * c_.h[j] * dt);
      }
      if (opt_.variance_II) {
        tangent_generator(c_, dt, dBk, dYk, G);
        E_next_ = E;
        E_next_.noalias() += G * E;
        E.swap(E_next_);
        step_inverse(G, e, Ainv);
      }
      for (std::size_t i = 0; i < e; ++i) {
        double acc = x_[i] + c_.b[i] * dt;
        for (std::size_t l = 0; l < e; ++l) acc += c_.sigma[i * e + l] * dBk[l];
        for (std::size_t j = 0; j < d; ++j) acc += c_.v[i * d + j] * dYk[j];
        x_next_[i] = acc;
      }
      for (std::size_t i = 0; i < e; ++i) {
        if (!std::isfinite(x_next_[i])) throw IntegrationError("non-finite state", k);
      }
      std::swap(x_, x_next_);
    }
    out_.log_w_ref = logw.value();
    out_.g_ref = g_.value(x_);

    if (opt_.variance_II) {
      for (Eigen::Index i = 0; i < E.size(); ++i) {
        if (!std::isfinite(E.data()[i])) throw IntegrationError("non-finite tangent flow", N);
      }
      g_.gradient(x_, grad_);
      for (std::size_t kp = 0; kp < E1; ++kp) {
        double acc = out_.g_ref * E(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(kp));
        for (std::size_t k = 0; k < e; ++k) {
          acc += grad_[k] * E(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(kp));
        }
        cvec_[kp] = acc;
        cvec_one_[kp] = E(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(kp));
      }
    }

    for (std::size_t l = 0; l < lv_.size(); ++l) {
      const LevelObservation& level = lv_[l];
      const std::size_t n = level.n, m = level.stride;
      const double h_dt = 1.0 / static_cast<double>(n);
      if (opt_.scheme_I) {
        NeumaierSum acc;
        for (std::size_t i = 0; i < n; ++i) {
          const double* h = h_.data() + i * m * d;
          for (std::size_t j = 0; j < d; ++j) {
            acc.add(h[j] * level.dY[i * d + j] - 0.5 * h[j] * h[j] * h_dt);
          }
        }
        out_.log_w_I[l] = acc.value();
      }
      if (opt_.scheme_II) {
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t q = 0; q < e; ++q) {
            double s = 0.0;
            for (std::size_t k = i * m; k < (i + 1) * m; ++k) s += dB[k * e + q];
            coarse_dB_[i * e + q] = s;
          }
        }
        std::copy(x0_.begin(), x0_.end(), x_.begin());
        NeumaierSum acc;
        for (std::size_t i = 0; i < n; ++i) {
          model_.evaluate(x_, y_.Y_at(i * m), c_, false);
          check_h(i);
          const double* dY = level.dY.data() + i * d;
          for (std::size_t j = 0; j < d; ++j) {
            acc.add(c_.h[j] * dY[j] - 0.5 * c_.h[j] * c_.h[j] * h_dt);
          }
          for (std::size_t a = 0; a < e; ++a) {
            double v = x_[a] + c_.b[a] * h_dt;
            for (std::size_t q = 0; q < e; ++q) v += c_.sigma[a * e + q] * coarse_dB_[i * e + q];
            for (std::size_t j = 0; j < d; ++j) v += c_.v[a * d + j] * dY[j];
            x_next_[a] = v;
          }
          for (std::size_t a = 0; a < e; ++a) {
            if (!std::isfinite(x_next_[a])) throw IntegrationError("non-finite state", i);
          }
          std::swap(x_, x_next_);
        }
        out_.log_w_II[l] = acc.value();
        out_.g_II[l] = g_.value(x_);
      }
    }
  }

  const FilterModel& model_;
  const TestFunction& g_;
  const ObservationPath& y_;
  const SweepOptions& opt_;
  const std::vector<LevelObservation>& lv_;
  std::size_t e_, d_, N_;
  Coefficients c_;
  FlowMatrix E_next_;
  std::vector<double> dB_, dB_anti_, x0_, x_, x_next_, grad_, h_, coarse_dB_;
  std::vector<double> a_, q_, f_;
  std::vector<double> cvec_, cvec_one_;
  std::vector<double> tmp_wI_, tmp_gwI_, tmp_wII_, tmp_gwII_;
  std::vector<Staged> staged_;
  MemberOutput out_;
};

}  // namespace

SweepResult particle_sweep(const FilterModel& model, const TestFunction& g,
                           const ObservationPath& y, std::size_t M, std::uint64_t seed,
                           const SweepOptions& opt) {
  const std::size_t e = model.e(), d = model.d(), N = y.n_fine;
  if (y.d != d) throw ConfigError("observation dimension does not match the model");
  if (M < 2) throw ConfigError("particle count must be at least 2");
  if (!is_power_of_two(N)) throw ConfigError("observation grid must be a power of two");
  if (opt.variance_II && e + 1 > kMaxFlowDim) {
    throw ConfigError("signal dimension too large for the tangent flow");
  }
  if (opt.antithetic_level != 0 && (N % opt.antithetic_level != 0)) {
    throw ConfigError("antithetic level must divide the observation grid");
  }
  std::vector<LevelObservation> lv;
  for (std::size_t n : opt.levels) {
    if (n == 0 || N % n != 0) {
      throw ConfigError("level " + std::to_string(n) + " does not divide n_fine");
    }
    lv.push_back({n, N / n, coarsen(y.dY, d, N, n)});
  }

  SweepResult r;
  r.samples = M;
  r.n_fine = N;
  r.e = e;
  r.d = d;
  r.levels = opt.levels;
  const std::size_t L = lv.size();
  r.failed.assign(M, 0);
  r.w_ref.assign(M, 0.0);
  r.gw_ref.assign(M, 0.0);
  r.w_I.assign(M * L, 0.0);
  r.gw_I.assign(M * L, 0.0);
  r.w_II.assign(M * L, 0.0);
  r.gw_II.assign(M * L, 0.0);

  const std::size_t K = std::max<std::size_t>(1, std::min(opt.chunks, M));
  r.chunks = K;
  r.chunk_begin.resize(K + 1);
  for (std::size_t c = 0; c <= K; ++c) r.chunk_begin[c] = c * M / K;
  r.chunk_used_I.assign(K, 0);
  r.chunk_used_II.assign(K, 0);
  const std::size_t G = r.grid_size();
  if (opt.variance_I) {
    r.uI_g.assign(K * G, 0.0);
    r.uI_one.assign(K * G, 0.0);
  }
  if (opt.variance_II) {
    r.uII_g.assign(K * G, 0.0);
    r.uII_one.assign(K * G, 0.0);
    r.flow_flagged.assign(M, 0);
  }

  const auto work = [&](std::size_t c) {
    SweepWorker worker(model, g, y, opt, lv);
    worker.run_chunk(c, r.chunk_begin[c], r.chunk_begin[c + 1], seed, r);
  };
  const long long K_ll = static_cast<long long>(K);
  if (opt.policy == ExecutionPolicy::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long long c = 0; c < K_ll; ++c) work(static_cast<std::size_t>(c));
  } else {
    for (long long c = 0; c < K_ll; ++c) work(static_cast<std::size_t>(c));
  }

  for (std::size_t p = 0; p < M; ++p) r.failures += r.failed[p];
  if (opt.variance_II) {
    for (std::size_t p = 0; p < M; ++p) r.flow_excluded += (!r.failed[p] && r.flow_flagged[p]);
  }
  return r;
}

namespace {

struct SchemeView {
  const std::vector<double>* w;
  const std::vector<double>* gw;
  std::size_t stride;
  std::size_t offset;

  double weight(std::size_t p) const { return (*w)[p * stride + offset]; }
  double gweight(std::size_t p) const { return (*gw)[p * stride + offset]; }
};

SchemeView view(const SweepResult& r, WeightSchemeSpec s) {
  switch (s.tag) {
    case WeightScheme::reference:
      return {&r.w_ref, &r.gw_ref, 1, 0};
    case WeightScheme::scheme_I:
      return {&r.w_I, &r.gw_I, r.levels.size(), r.level_index(s.n)};
    case WeightScheme::scheme_II:
      return {&r.w_II, &r.gw_II, r.levels.size(), r.level_index(s.n)};
  }
  throw ConfigError("unknown scheme");
}

ParticleEstimate summarize(const std::vector<double>& v, const SweepResult& r) {
  ParticleEstimate out;
  out.failures = r.failures;
  out.M = v.size();
  if (v.empty()) throw EstimationError("all particles failed");
  if (v.size() == 1) {
    out.value = v[0];
    return out;
  }
  const Moments m = moments(v);
  out.value = m.mean;
  out.std_error = m.mean_se;
  return out;
}

struct Ratio {
  double pi;
  double rho1;
};

Ratio ratio_of(const SweepResult& r, const SchemeView& s) {
  NeumaierSum num, den;
  for (std::size_t p = 0; p < r.samples; ++p) {
    if (r.failed[p]) continue;
    num.add(s.gweight(p));
    den.add(s.weight(p));
  }
  if (!(den.value() > 0.0)) throw EstimationError("all particles failed");
  const double used = static_cast<double>(r.samples - r.failures);
  return {num.value() / den.value(), den.value() / used};
}

}  // namespace

ParticleEstimate unnormalized(const SweepResult& r, WeightSchemeSpec scheme, bool with_g) {
  const SchemeView s = view(r, scheme);
  std::vector<double> v;
  v.reserve(r.samples);
  for (std::size_t p = 0; p < r.samples; ++p) {
    if (!r.failed[p]) v.push_back(with_g ? s.gweight(p) : s.weight(p));
  }
  return summarize(v, r);
}

ParticleEstimate normalized(const SweepResult& r, WeightSchemeSpec scheme) {
  const SchemeView s = view(r, scheme);
  const Ratio q = ratio_of(r, s);
  std::vector<double> psi;
  psi.reserve(r.samples);
  for (std::size_t p = 0; p < r.samples; ++p) {
    if (!r.failed[p]) psi.push_back((s.gweight(p) - q.pi * s.weight(p)) / q.rho1);
  }
  ParticleEstimate out = summarize(psi, r);
  out.value = q.pi;
  return out;
}

ParticleEstimate unnormalized_difference(const SweepResult& r, WeightSchemeSpec scheme) {
  const SchemeView ref = view(r, {WeightScheme::reference, 0});
  const SchemeView s = view(r, scheme);
  std::vector<double> v;
  v.reserve(r.samples);
  for (std::size_t p = 0; p < r.samples; ++p) {
    if (!r.failed[p]) v.push_back(ref.gweight(p) - s.gweight(p));
  }
  return summarize(v, r);
}

ParticleEstimate normalized_difference(const SweepResult& r, WeightSchemeSpec scheme) {
  const SchemeView ref = view(r, {WeightScheme::reference, 0});
  const SchemeView s = view(r, scheme);
  const Ratio qr = ratio_of(r, ref);
  const Ratio qs = ratio_of(r, s);
  std::vector<double> psi;
  psi.reserve(r.samples);
  for (std::size_t p = 0; p < r.samples; ++p) {
    if (r.failed[p]) continue;
    psi.push_back((ref.gweight(p) - qr.pi * ref.weight(p)) / qr.rho1 -
                  (s.gweight(p) - qs.pi * s.weight(p)) / qs.rho1);
  }
  ParticleEstimate out = summarize(psi, r);
  out.value = qr.pi - qs.pi;
  return out;
}

namespace {

SweepOptions options_for(WeightSchemeSpec scheme, SweepOptions base) {
  base.scheme_I = scheme.tag == WeightScheme::scheme_I;
  base.scheme_II = scheme.tag == WeightScheme::scheme_II;
  base.levels.clear();
  if (scheme.tag != WeightScheme::reference) base.levels.push_back(scheme.n);
  return base;
}

}  // namespace

ParticleEstimate rho_estimate(const FilterModel& model, const TestFunction& g,
                              const ObservationPath& y, WeightSchemeSpec scheme, std::size_t M,
                              std::uint64_t seed, const SweepOptions& base) {
  const SweepResult r = particle_sweep(model, g, y, M, seed, options_for(scheme, base));
  return unnormalized(r, scheme);
}

ParticleEstimate filter_estimate(const FilterModel& model, const TestFunction& g,
                                 const ObservationPath& y, WeightSchemeSpec scheme,
                                 std::size_t M, std::uint64_t seed, const SweepOptions& base) {
  const SweepResult r = particle_sweep(model, g, y, M, seed, options_for(scheme, base));
  return normalized(r, scheme);
}

ErrorSample make_error_sample(const SweepResult& r, WeightSchemeSpec scheme, bool normalized) {
  const ParticleEstimate diff =
      normalized ? normalized_difference(r, scheme) : unnormalized_difference(r, scheme);
  const double root_n = std::sqrt(static_cast<double>(scheme.n));
  ErrorSample out;
  out.n = scheme.n;
  out.raw = diff.value;
  out.rescaled = root_n * diff.value;
  out.std_error = root_n * diff.std_error;
  out.failures = diff.failures;
  return out;
}

namespace {

ErrorSample error_sample_impl(const FilterModel& model, const BrownianLattice& lattice,
                              const TestFunction& g, WeightScheme scheme, std::size_t n,
                              std::size_t M, std::uint64_t seed,
                              const ObservationPath* observation, const SweepOptions& base,
                              bool normalized) {
  if (scheme == WeightScheme::reference) {
    throw ConfigError("error samples compare the reference with scheme I or II");
  }
  if (n == 0 || n > lattice.n_fine / 8) throw ConfigError("level must be at most n_fine / 8");
  const ObservationPath brownian =
      observation == nullptr ? brownian_observation(lattice) : ObservationPath{};
  const ObservationPath& y = observation == nullptr ? brownian : *observation;
  const WeightSchemeSpec spec{scheme, n};
  const SweepResult r =
      particle_sweep(model, g, y, M, particle_seed(seed, lattice.path_index), options_for(spec, base));
  return make_error_sample(r, spec, normalized);
}

}  // namespace

ErrorSample error_sample(const FilterModel& model, const BrownianLattice& lattice,
                         const TestFunction& g, WeightScheme scheme, std::size_t n, std::size_t M,
                         std::uint64_t seed, const ObservationPath* observation,
                         const SweepOptions& base) {
  return error_sample_impl(model, lattice, g, scheme, n, M, seed, observation, base, false);
}

ErrorSample normalized_error_sample(const FilterModel& model, const BrownianLattice& lattice,
                                    const TestFunction& g, WeightScheme scheme, std::size_t n,
                                    std::size_t M, std::uint64_t seed,
                                    const ObservationPath* observation,
                                    const SweepOptions& base) {
  return error_sample_impl(model, lattice, g, scheme, n, M, seed, observation, base, true);
}

KalmanBucyPath kalman_bucy(const ScalarLinearGaussian& p, const ObservationPath& y) {
  if (y.d != 1) throw ConfigError("Kalman-Bucy oracle is scalar");
  const std::size_t N = y.n_fine;
  const double dt = 1.0 / static_cast<double>(N);
  KalmanBucyPath out;
  out.mean.resize(N + 1);
  out.variance.resize(N + 1);
  double m = p.m0, P = p.p0;
  out.mean[0] = m;
  out.variance[0] = P;
  for (std::size_t k = 0; k < N; ++k) {
    const double innovation = y.dY[k] - p.c * m * dt;
    const double m_next = m + p.a * m * dt + p.c * P * innovation;
    const double P_next = P + (2.0 * p.a * P + p.s * p.s - p.c * p.c * P * P) * dt;
    m = m_next;
    P = P_next;
    out.mean[k + 1] = m;
    out.variance[k + 1] = P;
  }
  return out;
}

}  // namespace filterlab
