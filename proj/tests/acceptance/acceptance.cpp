#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "filterlab/experiments.hpp"
#include "filterlab/limit_lab.hpp"
#include "filterlab/tangent.hpp"

namespace {

using namespace filterlab;

constexpr std::uint64_t kSeed = 12345;

struct Outcome {
  bool pass = false;
  std::string summary;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

PathPlan coupled_plan(bool scheme_I) {
  PathPlan p;
  p.model_id = "coupled";
  p.g_id = "shifted-sine";
  p.n_fine = 4096;
  p.levels = {16, 32, 64, 128, 256, 512};
  p.paths = 500;
  p.particles = 2000;
  p.seed = kSeed;
  p.under_P = true;
  p.scheme_I = scheme_I;
  p.scheme_II = !scheme_I;
  p.variance = true;
  p.normalized = !scheme_I;
  return p;
}

std::string mixed_summary(const MixedNormalStats& m) {
  return fmt("samples %zu, KS p %.4f, z mean %+.4f, z var %.4f, error var %.4f vs predicted %.4f "
             "(rel %.3f)",
             m.samples, m.ks.p_value, m.z_moments.mean, m.z_moments.variance, m.error_variance,
             m.mean_predicted, m.relative_error);
}

}  // namespace

int main() {
  const Thresholds th;
  PathTable table_I, table_II;
  bool have_I = false, have_II = false;

  std::vector<Criterion> criteria;

  criteria.push_back({1, "double-integral variance, theta = 1", 120.0, [&] {
    const ThetaOneCheck c = theta_one_check(256, 256, 100000, kSeed, th);
    return Outcome{c.pass_variance && c.pass_ks,
                   fmt("variance %.5f +- %.5f (target 0.5), KS p vs N(0,1/2) %.4g, KS p vs exact "
                       "law %.4g",
                       c.moments.variance, c.moments.variance_se, c.ks_normal.p_value,
                       c.ks_exact.p_value)};
  }});

  criteria.push_back({2, "quadratic-variation limit", 60.0, [&] {
    const std::size_t ladder[] = {512};
    const Integrand one = Integrand::constant(1.0);
    const LimitRow d = qv_limit_check(4096, 1000, kSeed, one, one, 0, 0, ladder, 0.5, 0.02)[0];
    const LimitRow o = qv_limit_check(4096, 1000, kSeed, one, one, 0, 1, ladder, 0.0, 0.02)[0];
    return Outcome{d.pass && o.pass, fmt("i = j mean %.4f (0.5 +- 0.02), i != j mean %+.4f "
                                         "(0 +- 0.02)",
                                         d.value, o.value)};
  }});

  criteria.push_back({3, "mixed case F = B_1, theta = B", 180.0, [&] {
    const MixedCaseCheck c = mixed_case_check(2048, 16384, 10000, kSeed, th);
    std::size_t passing = 0;
    for (const StableRow& r : c.stable) passing += r.check.pass;
    return Outcome{c.pass_variance && c.pass_stable,
                   fmt("variance %.5f +- %.5f (target 1/6), stable checks %zu/%zu within 3 sigma",
                       c.moments.variance, c.moments.variance_se, passing, c.stable.size())};
  }});

  criteria.push_back({4, "zero-limit L1 decay", 180.0, [&] {
    const std::vector<std::size_t> ladder{16, 32, 64, 128, 256, 512};
    const ZeroLimitTable t =
        zero_limit_check(find_zero_case("FB1_dBdW"), 4096, 2000, kSeed, ladder);
    return Outcome{t.slope <= -0.3,
                   fmt("FB1_dBdW slope %.4f +- %.4f (<= -0.3)", t.slope, t.slope_se)};
  }});

  criteria.push_back({5, "scheme I mixed-normal cross-validation", 900.0, [&] {
    table_I = run_paths(coupled_plan(true));
    have_I = true;
    const MixedNormalStats m =
        mixed_normal_stats(table_I, WeightScheme::scheme_I, 256, false, SignConvention::minus, th);
    return Outcome{m.pass(), mixed_summary(m)};
  }});

  criteria.push_back({6, "scheme II mixed-normal cross-validation", 1200.0, [&] {
    table_II = run_paths(coupled_plan(false));
    have_II = true;
    const MixedNormalStats m = mixed_normal_stats(table_II, WeightScheme::scheme_II, 256, false,
                                                  SignConvention::minus, th);
    const MixedNormalStats minus = mixed_normal_stats(table_II, WeightScheme::scheme_II, 256,
                                                      true, SignConvention::minus, th);
    const MixedNormalStats plus = mixed_normal_stats(table_II, WeightScheme::scheme_II, 256, true,
                                                     SignConvention::plus, th);
    const int passing = int(minus.pass()) + int(plus.pass());
    const char* which = passing != 1 ? "none unique" : (minus.pass() ? "minus" : "plus");
    return Outcome{m.pass() && passing == 1,
                   mixed_summary(m) +
                       fmt("; normalized: minus %s (KS p %.4f, z var %.4f), plus %s (KS p %.4f, "
                           "z var %.4f), passing convention: %s",
                           minus.pass() ? "pass" : "fail", minus.ks.p_value,
                           minus.z_moments.variance, plus.pass() ? "pass" : "fail",
                           plus.ks.p_value, plus.z_moments.variance, which)};
  }});

  criteria.push_back({7, "rate laws", 900.0, [&] {
    if (!have_I) table_I = run_paths(coupled_plan(true));
    if (!have_II) table_II = run_paths(coupled_plan(false));
    const RateStats rI = rate_stats(table_I, WeightScheme::scheme_I, false, th);
    const RateStats rII = rate_stats(table_II, WeightScheme::scheme_II, false, th);

    PathPlan sp;
    sp.model_id = "standard";
    sp.g_id = "shifted-sine";
    sp.n_fine = 4096;
    sp.levels = {16, 32, 64, 128, 256, 512};
    sp.paths = 100;
    sp.particles = 2000;
    sp.seed = kSeed;
    sp.under_P = true;
    sp.variance = false;
    const PathTable st = run_paths(sp);
    const RateStats sI = rate_stats(st, WeightScheme::scheme_I, true, th);
    const RateStats sII = rate_stats(st, WeightScheme::scheme_II, true, th);
    return Outcome{rI.pass_slope && rII.pass_slope && sI.pass_slope && sII.pass_slope,
                   fmt("coupled I %.3f, coupled II %.3f (-0.5 +- 0.15); standard I %.3f "
                       "(noise ratio %.2f), standard II %.3f (noise ratio %.2f) (<= -0.75)",
                       rI.fit.slope, rII.fit.slope, sI.fit.slope, sI.noise_ratio, sII.fit.slope,
                       sII.noise_ratio)};
  }});

  criteria.push_back({8, "Kalman-Bucy oracle", 300.0, [&] {
    const KalmanStats k = kalman_check(4096, 200, 2000, kSeed, th);
    return Outcome{k.pass, fmt("%zu/%zu paths within 3 combined se (fraction %.3f, mean |z| "
                               "%.3f, M-doubling change %.2e)",
                               k.within, k.paths, k.fraction, k.mean_abs_z, k.m_doubling)};
  }});

  criteria.push_back({9, "variation-of-constants residual", 120.0, [&] {
    const std::vector<std::size_t> levels{256, 512, 1024, 2048, 4096};
    const VocCheck v = variation_of_constants_check(levels, 1000, kSeed);
    return Outcome{v.slope <= -0.4,
                   fmt("slope %.4f (<= -0.4), rms residual %.3e at 2^8, %.3e at 2^12", v.slope,
                       v.rms_residual.front(), v.rms_residual.back())};
  }});

  criteria.push_back({10, "projection before integration", 120.0, [&] {
    bool all = true;
    std::string s;
    for (FubiniCase c : {FubiniCase::w_path, FubiniCase::b_path, FubiniCase::b_squared}) {
      const FubiniResult f = fubini_check(c, 2000, 200, kSeed, 4, th.sigmas);
      all = all && f.pass;
      s += fmt("%s%s %+.2e +- %.2e", s.empty() ? "" : ", ", f.case_id.c_str(), f.mean_discrepancy,
               f.std_error);
    }
    return Outcome{all, s};
  }});

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs <= c.budget_seconds;
    const bool pass = o.pass && in_budget;
    failures += !pass;
    std::printf("%s criterion %d (%s): %s; %.1f s of %.0f s budget\n", pass ? "PASS" : "FAIL",
                c.id, c.name.c_str(), o.summary.c_str(), secs, c.budget_seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
