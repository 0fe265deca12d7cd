#include "filterlab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "filterlab/error.hpp"
#include "filterlab/experiments.hpp"
#include "filterlab/limit_lab.hpp"
#include "filterlab/model.hpp"
#include "filterlab/rng.hpp"
#include "filterlab/variance.hpp"

namespace filterlab {

namespace fs = std::filesystem;

bool SuiteOutcome::pass() const {
  if (!error.empty() || verdicts.empty()) return false;
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

bool ExperimentReport::pass() const {
  return !suites.empty() &&
         std::all_of(suites.begin(), suites.end(), [](const SuiteOutcome& s) { return s.pass(); });
}

nlohmann::json to_json(const ExperimentReport& report, bool with_timings) {
  nlohmann::json suites = nlohmann::json::array();
  nlohmann::json timings = nlohmann::json::object();
  for (const SuiteOutcome& s : report.suites) {
    nlohmann::json verdicts = nlohmann::json::array();
    for (const Verdict& v : s.verdicts) verdicts.push_back(to_json(v));
    suites.push_back({{"suite", s.suite},
                      {"pass", s.pass()},
                      {"verdicts", verdicts},
                      {"files", s.files},
                      {"failures", s.failures},
                      {"error", s.error},
                      {"details", s.details.is_null() ? nlohmann::json::object() : s.details}});
    timings[s.suite] = s.seconds;
  }
  nlohmann::json out{{"config", to_json(report.config)}, {"suites", suites}, {"pass", report.pass()}};
  if (with_timings) out["timings"] = timings;
  return out;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Comma-separated writer with a fixed header.
class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

/// Header plus rows of a CSV written by Csv.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(cell);
  return out;
}

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  Table t;
  std::string line;
  if (std::getline(in, line)) t.header = split_row(line);
  while (std::getline(in, line)) {
    if (!line.empty()) t.rows.push_back(split_row(line));
  }
  return t;
}

Verdict verdict(const ExperimentConfig& c, const std::string& suite, const std::string& statistic,
                double value, double predicted, double tolerance, bool pass) {
  return {suite, statistic, value, predicted, tolerance, pass, c.seed};
}

PathPlan base_plan(const ExperimentConfig& c) {
  PathPlan plan;
  plan.model_id = c.model_id;
  plan.g_id = c.g_id;
  plan.n_fine = c.n_fine;
  plan.levels = c.levels;
  plan.paths = c.paths;
  plan.particles = c.particles;
  plan.seed = c.seed;
  plan.under_P = true;
  plan.scheme_I = c.scheme == WeightScheme::scheme_I;
  plan.scheme_II = c.scheme == WeightScheme::scheme_II;
  return plan;
}

std::size_t count_failures(const PathTable& table) {
  std::size_t f = 0;
  for (const PathRecord& r : table.records) f += r.ok ? r.failures : 1;
  return f;
}

void write_errors(const fs::path& path, const PathTable& table, const ExperimentConfig& c,
                  bool normalized, const std::vector<std::vector<double>>* predicted) {
  Csv csv(path, {"path_index", "n", "scheme", "g_id", "raw_error", "rescaled_error",
                 "variance_estimate", "std_error", "failures"});
  const bool first = c.scheme == WeightScheme::scheme_I;
  for (std::size_t r = 0; r < table.records.size(); ++r) {
    const PathRecord& rec = table.records[r];
    if (!rec.ok) continue;
    const auto& es = normalized ? (first ? rec.normalized_I : rec.normalized_II)
                                : (first ? rec.errors_I : rec.errors_II);
    for (std::size_t l = 0; l < es.size(); ++l) {
      const double v = predicted ? (*predicted)[r][l] : std::nan("");
      csv.row({std::to_string(rec.path_index), std::to_string(es[l].n), to_string(c.scheme),
               c.g_id, num(es[l].raw), num(es[l].rescaled), num(v), num(es[l].std_error),
               std::to_string(es[l].failures)});
    }
  }
}

void write_u_grid(const fs::path& path, const std::vector<double>& u, std::size_t n_fine,
                  std::size_t d) {
  Csv csv(path, {"t", "i", "j", "u"});
  const std::size_t dd = d * d;
  for (std::size_t k = 0; k <= n_fine && (k + 1) * dd <= u.size(); ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n_fine);
    for (std::size_t ij = 0; ij < dd; ++ij) {
      csv.row({num(t), std::to_string(ij / d), std::to_string(ij % d), num(u[k * dd + ij])});
    }
  }
}

void suite_rate(const ExperimentConfig& c, const fs::path& out, SuiteOutcome& s) {
  const auto model = make_model(c.model_id);
  const bool standard = model->standard_form();
  PathPlan plan = base_plan(c);
  plan.variance = false;
  const PathTable table = run_paths(plan);
  const RateStats rs = rate_stats(table, c.scheme, standard, c.thresholds);
  s.failures = count_failures(table);

  const double target = standard ? c.thresholds.standard_slope_max : c.thresholds.slope_target;
  const double tol = standard ? 0.0 : c.thresholds.slope_tolerance;
  s.verdicts.push_back(verdict(c, s.suite, "rate_slope", rs.fit.slope, target, tol, rs.pass_slope));
  s.verdicts.push_back(verdict(c, s.suite, "particle_noise_ratio", rs.noise_ratio, 0.0,
                               c.thresholds.noise_ratio, rs.pass_noise));
  s.details = {{"slope_se", rs.fit.slope_se},
               {"intercept", rs.fit.intercept},
               {"standard_form", standard},
               {"samples", rs.samples},
               {"levels", rs.fit.levels},
               {"mean_abs_error", rs.fit.mean_abs_error},
               {"mean_abs_error_se", rs.fit.mean_abs_error_se}};

  write_errors(out / "errors_rate.csv", table, c, false, nullptr);
  s.files.push_back("errors_rate.csv");
}

nlohmann::json mixed_json(const MixedNormalStats& m) {
  return {{"samples", m.samples},
          {"excluded", m.excluded},
          {"degenerate", m.degenerate},
          {"ks_statistic", m.ks.statistic},
          {"ks_p", m.ks.p_value},
          {"z_mean", m.z_moments.mean},
          {"z_mean_se", m.z_moments.mean_se},
          {"z_variance", m.z_moments.variance},
          {"z_variance_se", m.z_moments.variance_se},
          {"error_variance", m.error_variance},
          {"error_variance_se", m.error_variance_se},
          {"mean_V_hat", m.mean_V_hat},
          {"mean_predicted", m.mean_predicted},
          {"relative_error", m.relative_error},
          {"pass", m.pass()}};
}

void suite_mixed_normal(const ExperimentConfig& c, const fs::path& out, SuiteOutcome& s) {
  PathPlan plan = base_plan(c);
  plan.levels = {c.test_level};
  plan.variance = true;
  plan.normalized = c.normalized;
  const PathTable table = run_paths(plan);
  s.failures = count_failures(table);
  const Thresholds& th = c.thresholds;
  const std::size_t n = c.test_level;
  const MixedNormalStats m = mixed_normal_stats(table, c.scheme, n, c.normalized, c.sign, th);

  s.verdicts.push_back(verdict(c, s.suite, "ks_p_value", m.ks.p_value, th.ks_p, 0.0, m.pass_ks));
  s.verdicts.push_back(
      verdict(c, s.suite, "z_mean", m.z_moments.mean, 0.0, th.mean_tolerance, m.pass_mean));
  s.verdicts.push_back(verdict(c, s.suite, "z_variance", m.z_moments.variance,
                               0.5 * (th.variance_low + th.variance_high),
                               0.5 * (th.variance_high - th.variance_low), m.pass_variance));
  s.verdicts.push_back(verdict(c, s.suite, "error_variance_vs_V_hat", m.error_variance,
                               m.mean_predicted, th.variance_relative, m.pass_relative));
  s.details = {{"sign_convention", to_string(c.sign)}, {"stats", mixed_json(m)}};

  if (c.normalized) {
    const SignConvention other =
        c.sign == SignConvention::minus ? SignConvention::plus : SignConvention::minus;
    const MixedNormalStats alt = mixed_normal_stats(table, c.scheme, n, true, other, th);
    const int passing = (m.pass() ? 1 : 0) + (alt.pass() ? 1 : 0);
    s.verdicts.push_back(verdict(c, s.suite, "sign_conventions_passing", passing, 1.0, 0.0,
                                 passing == 1));
    s.details["alternate_sign_convention"] = to_string(other);
    s.details["alternate_stats"] = mixed_json(alt);
  }

  const bool first = c.scheme == WeightScheme::scheme_I;
  const int sign_slot = c.sign == SignConvention::minus ? 0 : 1;
  std::vector<std::vector<double>> predicted;
  {
    Csv csv(out / "variance.csv", {"path_index", "scheme", "g_id", "V_hat", "V_hat_stderr",
                                   "excluded_particles", "sign_convention"});
    for (const PathRecord& rec : table.records) {
      const VarianceSummary& v = c.normalized ? (first ? rec.mu_I[sign_slot] : rec.mu_II[sign_slot])
                                              : (first ? rec.V_I : rec.V_II);
      const auto& es = c.normalized ? (first ? rec.normalized_I : rec.normalized_II)
                                    : (first ? rec.errors_I : rec.errors_II);
      predicted.push_back({es.empty() ? std::nan("")
                                      : predicted_error_variance(v.V_hat, n, c.n_fine,
                                                                 es[0].std_error)});
      if (!rec.ok) continue;
      csv.row({std::to_string(rec.path_index), to_string(c.scheme), c.g_id, num(v.V_hat),
               num(v.std_error), std::to_string(v.excluded), to_string(c.sign)});
    }
  }
  write_errors(out / "errors_mixed_normal.csv", table, c, c.normalized, &predicted);
  {
    Csv csv(out / "mixed_normal_z.csv", {"path_index", "z"});
    for (std::size_t i = 0; i < m.z.size(); ++i) {
      csv.row({std::to_string(m.z_paths[i]), num(m.z[i])});
    }
  }
  write_u_grid(out / "u_grid.csv", first ? table.u_grid_I : table.u_grid_II, c.n_fine, table.d);
  s.files.insert(s.files.end(),
                 {"variance.csv", "errors_mixed_normal.csv", "mixed_normal_z.csv", "u_grid.csv"});
}

void suite_variance_crosscheck(const ExperimentConfig& c, const fs::path& out, SuiteOutcome& s) {
  const auto model = make_model(c.model_id);
  const auto g = make_test_function(c.g_id);
  const std::size_t K = std::min<std::size_t>(c.paths, 20);
  const bool first = c.scheme == WeightScheme::scheme_I;
  SweepOptions base;
  base.h_bound = model->coefficient_bound();
  const std::uint64_t second_seed = derive_seed(c.seed, Stream::synthetic, 1);

  Csv csv(out / "variance_crosscheck.csv",
          {"path_index", "scheme", "g_id", "V_hat", "V_hat_stderr", "V_hat_2M", "V_hat_2M_stderr",
           "V_hat_stride2"});
  std::size_t agree = 0, used = 0;
  double max_rel = 0.0;
  for (std::size_t p = 0; p < K; ++p) {
    try {
      const ObservationPath y = make_observation(*model, c.n_fine, c.seed, p, true);
      const auto estimate = [&](std::size_t M, std::uint64_t seed) {
        return first ? u_estimate_scheme_I(*model, y, *g, M, particle_seed(seed, p), base)
                     : u_estimate_scheme_II(*model, y, *g, M, particle_seed(seed, p), base);
      };
      const VarianceEstimate v1 = estimate(c.particles, c.seed);
      const VarianceEstimate v2 = estimate(2 * c.particles, second_seed);
      const double stride2 = trapezoid_variance(v1.u, c.n_fine, v1.d, 2);
      const double combined = std::hypot(v1.V_hat_stderr, v2.V_hat_stderr);
      if (std::abs(v1.V_hat - v2.V_hat) <= c.thresholds.sigmas * combined) ++agree;
      if (v1.V_hat > c.thresholds.variance_floor) {
        max_rel = std::max(max_rel, std::abs(stride2 - v1.V_hat) / v1.V_hat);
      }
      ++used;
      csv.row({std::to_string(p), to_string(c.scheme), c.g_id, num(v1.V_hat),
               num(v1.V_hat_stderr), num(v2.V_hat), num(v2.V_hat_stderr), num(stride2)});
    } catch (const IntegrationError&) {
      ++s.failures;
    } catch (const EstimationError&) {
      ++s.failures;
    }
  }
  const double fraction = used ? static_cast<double>(agree) / static_cast<double>(used) : 0.0;
  s.verdicts.push_back(verdict(c, s.suite, "M_doubling_agreement", fraction, 1.0, 0.1,
                               used > 0 && fraction >= 0.9));
  s.verdicts.push_back(verdict(c, s.suite, "quadrature_stride2_max_relative", max_rel, 0.0, 0.01,
                               used > 0 && max_rel <= 0.01));
  s.details = {{"paths", used}};
  s.files.push_back("variance_crosscheck.csv");
}

LimitRow limit_row(const std::string& id, std::size_t n, const std::string& stat, double value,
                   double se, double predicted, bool pass) {
  return {id, n, stat, value, se, predicted, pass};
}

/// E|projected| of a zero-limit case at level n on an n_fine grid.
double zero_limit_mean_abs(const std::string& id, std::size_t n_fine, std::size_t n) {
  if (id == "FB1sq_dBdB") return 1.0 / std::sqrt(static_cast<double>(n));
  if (id != "FB1_dBdW") return 0.0;
  // sqrt(n) sum_k (t_k - eta) dW_k is centred Gaussian.
  const double m = static_cast<double>(n_fine / n);
  const double dt = 1.0 / static_cast<double>(n_fine);
  const double dn = static_cast<double>(n);
  const double var = dn * dn * dt * dt * dt * (m - 1.0) * m * (2.0 * m - 1.0) / 6.0;
  return std::sqrt(2.0 * var / std::numbers::pi);
}

void suite_limit_lab(const ExperimentConfig& c, const fs::path& out, SuiteOutcome& s) {
  const Thresholds& th = c.thresholds;
  const std::size_t n = c.test_level;
  const std::size_t lattices = c.limit_lattices;
  std::vector<LimitRow> rows;

  const ThetaOneCheck one = theta_one_check(n, n, lattices, c.seed, th);
  s.verdicts.push_back(verdict(c, s.suite, "F1_theta1_variance", one.moments.variance, 0.5,
                               th.sigmas * one.moments.variance_se, one.pass_variance));
  s.verdicts.push_back(
      verdict(c, s.suite, "F1_theta1_ks_p", one.ks_normal.p_value, th.ks_p, 0.0, one.pass_ks));
  rows.push_back(limit_row("F1_theta1", n, "variance", one.moments.variance,
                           one.moments.variance_se, 0.5, one.pass_variance));
  rows.push_back(limit_row("F1_theta1", n, "ks_p_normal", one.ks_normal.p_value, 0.0, th.ks_p,
                           one.pass_ks));
  rows.push_back(limit_row("F1_theta1", n, "ks_p_exact_law", one.ks_exact.p_value, 0.0, th.ks_p,
                           one.ks_exact.p_value > th.ks_p));

  const MixedCaseCheck mixed = mixed_case_check(n, c.n_fine, lattices, c.seed, th);
  s.verdicts.push_back(verdict(c, s.suite, "FB1_thetaB_variance", mixed.moments.variance,
                               1.0 / 6.0, th.sigmas * mixed.moments.variance_se,
                               mixed.pass_variance));
  rows.push_back(limit_row("FB1_thetaB", n, "variance", mixed.moments.variance,
                           mixed.moments.variance_se, 1.0 / 6.0, mixed.pass_variance));
  for (const StableRow& r : mixed.stable) {
    const std::string stat = "stable_" + r.weight + "_" + r.function;
    s.verdicts.push_back(verdict(c, s.suite, "FB1_thetaB_" + stat, r.check.value,
                                 r.check.predicted, th.sigmas * r.check.std_error, r.check.pass));
    rows.push_back(limit_row("FB1_thetaB", n, stat, r.check.value, r.check.std_error,
                             r.check.predicted, r.check.pass));
  }

  const std::size_t top = c.levels.back();
  const std::size_t qv_paths = std::min<std::size_t>(lattices, 1000);
  const std::size_t ladder[] = {top};
  const Integrand unit = Integrand::constant(1.0);
  for (const auto& [i, j, predicted] : {std::tuple<std::size_t, std::size_t, double>{0, 0, 0.5},
                                        std::tuple<std::size_t, std::size_t, double>{0, 1, 0.0}}) {
    for (const LimitRow& r :
         qv_limit_check(c.n_fine, qv_paths, c.seed, unit, unit, i, j, ladder, predicted, 0.02)) {
      s.verdicts.push_back(verdict(c, s.suite, r.case_id + "_mean", r.value, predicted, 0.02,
                                   r.pass));
      rows.push_back(r);
    }
  }

  const std::size_t zero_paths = std::min<std::size_t>(lattices, 2000);
  for (const ZeroLimitCase& z : zero_limit_catalog()) {
    const ZeroLimitTable t = zero_limit_check(z, c.n_fine, zero_paths, c.seed, c.levels);
    for (LimitRow r : t.rows) {
      r.predicted = zero_limit_mean_abs(z.id, c.n_fine, r.n);
      r.pass = std::abs(r.value - r.predicted) <= th.sigmas * r.std_error + 1e-15;
      rows.push_back(r);
    }
    if (z.id == "FB1_dBdW") {
      const bool pass = t.slope <= -0.3;
      s.verdicts.push_back(verdict(c, s.suite, "FB1_dBdW_l1_slope", t.slope, -0.3, 0.0, pass));
      rows.push_back(limit_row(z.id, 0, "l1_slope", t.slope, t.slope_se, -0.3, pass));
    }
  }

  for (FubiniCase fc : {FubiniCase::w_path, FubiniCase::b_path, FubiniCase::b_squared}) {
    const FubiniResult f = fubini_check(fc, 2000, 200, c.seed, 4, th.sigmas);
    s.verdicts.push_back(verdict(c, s.suite, "fubini_" + f.case_id, f.mean_discrepancy, 0.0,
                                 th.sigmas * f.std_error, f.pass));
    rows.push_back(
        limit_row("fubini_" + f.case_id, 4, "mean_discrepancy", f.mean_discrepancy, f.std_error,
                  0.0, f.pass));
  }

  for (const L2Row& r : zero_convergence_table(c.n_fine, qv_paths, c.seed, c.levels)) {
    const double tol = 0.1 * r.predicted;
    rows.push_back(limit_row("L2_A_dM", r.n, "l2_norm", r.l2_A_dM, 0.0, r.predicted,
                             std::abs(r.l2_A_dM - r.predicted) <= tol));
    rows.push_back(limit_row("L2_M_dA", r.n, "l2_norm", r.l2_M_dA, 0.0, r.predicted,
                             std::abs(r.l2_M_dA - r.predicted) <= tol));
  }

  Csv csv(out / "limit_lab.csv",
          {"case_id", "n", "statistic", "value", "std_error", "predicted", "pass"});
  for (const LimitRow& r : rows) {
    csv.row({r.case_id, std::to_string(r.n), r.statistic, num(r.value), num(r.std_error),
             num(r.predicted), r.pass ? "true" : "false"});
  }
  s.files.push_back("limit_lab.csv");
}

void suite_oracle_kalman(const ExperimentConfig& c, const fs::path& out, SuiteOutcome& s) {
  if (c.model_id != "linear-gaussian") {
    throw ConfigError("oracle_kalman needs model = linear-gaussian");
  }
  const KalmanStats k = kalman_check(c.n_fine, c.paths, c.particles, c.seed, c.thresholds);
  s.verdicts.push_back(verdict(c, s.suite, "fraction_within_sigmas", k.fraction,
                               c.thresholds.kalman_fraction, 0.0, k.pass));
  s.details = {{"paths", k.paths},
               {"within", k.within},
               {"mean_abs_z", k.mean_abs_z},
               {"m_doubling_mean_abs_change", k.m_doubling}};
  Csv csv(out / "kalman.csv", {"path_index", "filter_mean", "filter_se", "kalman_mean",
                               "ode_error"});
  for (std::size_t p = 0; p < k.filter_mean.size(); ++p) {
    csv.row({std::to_string(p), num(k.filter_mean[p]), num(k.filter_se[p]),
             num(k.kalman_mean[p]), num(k.kalman_se[p])});
  }
  s.files.push_back("kalman.csv");
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

}  // namespace

ExperimentReport run(const ExperimentConfig& config, const fs::path& out_dir) {
  validate(config);
  fs::create_directories(out_dir);
  ExperimentReport report;
  report.config = config;
  for (const std::string& name : config.suites) {
    SuiteOutcome s;
    s.suite = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (name == "rate") {
        suite_rate(config, out_dir, s);
      } else if (name == "mixed_normal") {
        suite_mixed_normal(config, out_dir, s);
      } else if (name == "variance_crosscheck") {
        suite_variance_crosscheck(config, out_dir, s);
      } else if (name == "limit_lab") {
        suite_limit_lab(config, out_dir, s);
      } else if (name == "oracle_kalman") {
        suite_oracle_kalman(config, out_dir, s);
      }
    } catch (const std::exception& e) {
      s.error = e.what();
    }
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    nlohmann::json verdicts = nlohmann::json::array();
    for (const Verdict& v : s.verdicts) verdicts.push_back(to_json(v));
    const std::string file = name + "_verdict.json";
    write_json(out_dir / file, verdicts);
    s.files.push_back(file);
    report.suites.push_back(std::move(s));
  }
  write_json(out_dir / "report.json", to_json(report));
  return report;
}

std::vector<fs::path> emit_plotdata(const fs::path& out_dir) {
  if (!fs::exists(out_dir / "report.json")) {
    throw ConfigError("no report.json in '" + out_dir.string() + "'");
  }
  std::vector<fs::path> written;

  if (fs::exists(out_dir / "errors_rate.csv")) {
    const Table t = read_csv(out_dir / "errors_rate.csv");
    const std::size_t cn = t.column("n"), ce = t.column("raw_error");
    std::map<std::size_t, std::vector<double>> by_level;
    for (const auto& r : t.rows) by_level[std::stoul(r[cn])].push_back(std::abs(std::stod(r[ce])));
    const fs::path path = out_dir / "plot_rate.csv";
    Csv csv(path, {"n", "mean_abs_err", "stderr"});
    for (const auto& [n, v] : by_level) {
      const Moments m = moments(v);
      csv.row({std::to_string(n), num(m.mean), num(m.mean_se)});
    }
    written.push_back(path);
  }

  if (fs::exists(out_dir / "mixed_normal_z.csv")) {
    const Table t = read_csv(out_dir / "mixed_normal_z.csv");
    const std::size_t cz = t.column("z");
    std::vector<double> z;
    for (const auto& r : t.rows) z.push_back(std::stod(r[cz]));
    std::sort(z.begin(), z.end());
    const fs::path path = out_dir / "plot_ecdf.csv";
    Csv csv(path, {"z_value", "ecdf", "normal_cdf"});
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double F = static_cast<double>(i + 1) / static_cast<double>(z.size());
      csv.row({num(z[i]), num(F), num(normal_cdf(z[i]))});
    }
    written.push_back(path);
  }

  if (fs::exists(out_dir / "u_grid.csv")) {
    const Table t = read_csv(out_dir / "u_grid.csv");
    const fs::path path = out_dir / "plot_u.csv";
    Csv csv(path, {"t", "i", "j", "u"});
    for (const auto& r : t.rows) csv.row(r);
    written.push_back(path);
  }
  return written;
}

}  // namespace filterlab
