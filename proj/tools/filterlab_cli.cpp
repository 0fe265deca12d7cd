#include <omp.h>

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include "filterlab/config.hpp"
#include "filterlab/error.hpp"
#include "filterlab/model.hpp"
#include "filterlab/runner.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

void print_summary(const filterlab::ExperimentReport& report) {
  for (const auto& s : report.suites) {
    std::cout << (s.pass() ? "PASS " : "FAIL ") << s.suite;
    if (!s.error.empty()) std::cout << "  error: " << s.error;
    std::cout << "  (" << s.seconds << " s)\n";
    for (const auto& v : s.verdicts) {
      std::cout << "  " << (v.pass ? "pass " : "fail ") << v.statistic << " = " << v.value
                << "  predicted " << v.predicted << "  tolerance " << v.tolerance << '\n';
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euler discretization lab for Girsanov-weighted nonlinear filters"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "filterlab_out";
  std::uint64_t seed = 0;
  int threads = 0;

  auto* run = app.add_subcommand("run", "Run the suites of a config file");
  run->add_option("--config", config_path, "key = value config file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--threads", threads, "OpenMP threads (results do not depend on it)")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--out", out_dir, "Output directory");

  auto* models = app.add_subcommand("list-models", "List model identifiers");
  auto* suites = app.add_subcommand("list-suites", "List suite identifiers");

  auto* plot = app.add_subcommand("emit-plotdata", "Write plot CSVs from a finished run");
  plot->add_option("--out", out_dir, "Directory holding report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*models) {
      for (const auto& id : filterlab::model_ids()) std::cout << id << '\n';
      return 0;
    }
    if (*suites) {
      for (const auto& id : filterlab::suite_ids()) std::cout << id << '\n';
      return 0;
    }
    if (*plot) {
      for (const auto& p : filterlab::emit_plotdata(out_dir)) std::cout << p.string() << '\n';
      return 0;
    }

    filterlab::ExperimentConfig config = filterlab::load_config(config_path);
    if (*seed_opt) config.seed = seed;
    filterlab::validate(config);
    if (threads > 0) omp_set_num_threads(threads);
    const filterlab::ExperimentReport report = filterlab::run(config, out_dir);
    filterlab::emit_plotdata(out_dir);
    print_summary(report);
    return report.pass() ? 0 : kExitFail;
  } catch (const filterlab::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
}
