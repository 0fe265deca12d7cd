#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "filterlab/experiments.hpp"
#include "filterlab/filter.hpp"
#include "filterlab/tangent.hpp"

namespace filterlab {

/// Suite identifiers accepted in the `suites` key.
const std::vector<std::string>& suite_ids();

/// Experiment description read from a key = value file.
///
/// Recognised keys:
///   model, scheme (I | II), g, n_fine, levels (comma list), paths,
///   particles, seed, suites (comma list), sign_convention (minus | plus),
///   test_level, normalized (true | false), limit_lattices and
///   threshold.<name> for every field of Thresholds.
struct ExperimentConfig {
  std::string model_id = "coupled";
  WeightScheme scheme = WeightScheme::scheme_I;
  std::string g_id = "shifted-sine";
  std::size_t n_fine = 4096;
  std::vector<std::size_t> levels{16, 32, 64, 128, 256, 512};
  std::size_t paths = 500;
  std::size_t particles = 2000;
  std::uint64_t seed = 12345;
  std::vector<std::string> suites;
  SignConvention sign = SignConvention::minus;
  std::size_t test_level = 256;
  bool normalized = false;
  std::size_t limit_lattices = 10000;
  Thresholds thresholds;
};

/// Parses the key = value text. Blank lines and lines starting with '#'
/// are ignored; unknown or repeated keys raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Checks the invariants: n_fine a power of two, every level a divisor of
/// n_fine no larger than n_fine / 8, positive counts, known ids and a
/// non-empty suite list.
void validate(const ExperimentConfig& config);

/// Canonical key = value rendering; parse_config(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig& config);
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace filterlab
