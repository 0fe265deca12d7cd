#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "filterlab/config.hpp"
#include "filterlab/stats.hpp"

namespace filterlab {

/// Outcome of one suite. `files` are relative to the output directory.
struct SuiteOutcome {
  std::string suite;
  std::vector<Verdict> verdicts;
  std::vector<std::string> files;
  std::size_t failures = 0;
  std::string error;        ///< set when the suite aborted
  nlohmann::json details;   ///< suite-specific summaries
  double seconds = 0.0;

  bool pass() const;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<SuiteOutcome> suites;

  bool pass() const;
};

/// report.json layout: config echo, suites (verdicts, files, failures,
/// error, details) and the aggregate verdict. Wall-clock times go to the
/// separate "timings" member only when `with_timings` is set.
nlohmann::json to_json(const ExperimentReport& report, bool with_timings = true);

/// Validates the config (throws ConfigError before touching the disk), runs
/// each suite in order and writes report.json, <suite>_verdict.json and the
/// raw CSVs into `out_dir`. A suite that throws is recorded with its error
/// and the remaining suites still run.
ExperimentReport run(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Writes plot-ready CSVs next to the report in `out_dir`:
///   plot_rate.csv  (n, mean_abs_err, stderr), sorted by n
///   plot_ecdf.csv  (z_value, ecdf, normal_cdf), sorted by z_value
///   plot_u.csv     (t, i, j, u), sorted by t then (i, j)
/// Only the files whose raw data exist are written; returns their paths.
std::vector<std::filesystem::path> emit_plotdata(const std::filesystem::path& out_dir);

}  // namespace filterlab
