#include "filterlab/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "filterlab/error.hpp"
#include "filterlab/lattice.hpp"
#include "filterlab/model.hpp"

namespace filterlab {

const std::vector<std::string>& suite_ids() {
  static const std::vector<std::string> ids{"rate", "mixed_normal", "limit_lab",
                                            "variance_crosscheck", "oracle_kalman"};
  return ids;
}

namespace {

using ThresholdField = std::pair<const char*, double Thresholds::*>;

constexpr std::array<ThresholdField, 12> kThresholdFields{{
    {"ks_p", &Thresholds::ks_p},
    {"sigmas", &Thresholds::sigmas},
    {"slope_target", &Thresholds::slope_target},
    {"slope_tolerance", &Thresholds::slope_tolerance},
    {"standard_slope_max", &Thresholds::standard_slope_max},
    {"mean_tolerance", &Thresholds::mean_tolerance},
    {"variance_low", &Thresholds::variance_low},
    {"variance_high", &Thresholds::variance_high},
    {"variance_relative", &Thresholds::variance_relative},
    {"kalman_fraction", &Thresholds::kalman_fraction},
    {"noise_ratio", &Thresholds::noise_ratio},
    {"variance_floor", &Thresholds::variance_floor},
}};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("key '" + key + "': cannot parse '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + value + "'");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::ostringstream out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out << ',';
    out << items[i];
  }
  return out.str();
}

void apply(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "model") {
    c.model_id = value;
  } else if (key == "scheme") {
    c.scheme = parse_weight_scheme(value);
    if (c.scheme == WeightScheme::reference) throw ConfigError("scheme must be I or II");
  } else if (key == "g") {
    c.g_id = value;
  } else if (key == "n_fine") {
    c.n_fine = parse_number<std::size_t>(key, value);
  } else if (key == "levels") {
    c.levels.clear();
    for (const auto& item : split_list(value)) {
      c.levels.push_back(parse_number<std::size_t>(key, item));
    }
  } else if (key == "paths") {
    c.paths = parse_number<std::size_t>(key, value);
  } else if (key == "particles") {
    c.particles = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "suites") {
    c.suites = split_list(value);
  } else if (key == "sign_convention") {
    c.sign = parse_sign_convention(value);
  } else if (key == "test_level") {
    c.test_level = parse_number<std::size_t>(key, value);
  } else if (key == "normalized") {
    c.normalized = parse_bool(key, value);
  } else if (key == "limit_lattices") {
    c.limit_lattices = parse_number<std::size_t>(key, value);
  } else if (key.rfind("threshold.", 0) == 0) {
    const std::string name = key.substr(10);
    const auto it = std::find_if(kThresholdFields.begin(), kThresholdFields.end(),
                                 [&](const ThresholdField& f) { return name == f.first; });
    if (it == kThresholdFields.end()) throw ConfigError("unknown threshold '" + name + "'");
    c.thresholds.*(it->second) = parse_number<double>(key, value);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::stringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second) throw ConfigError("key '" + key + "' given twice");
    apply(c, key, value);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate(const ExperimentConfig& c) {
  if (c.suites.empty()) throw ConfigError("suite list is empty");
  for (const auto& s : c.suites) {
    const auto& ids = suite_ids();
    if (std::find(ids.begin(), ids.end(), s) == ids.end()) {
      throw ConfigError("unknown suite '" + s + "'");
    }
  }
  const auto models = model_ids();
  if (std::find(models.begin(), models.end(), c.model_id) == models.end()) {
    throw ConfigError("unknown model '" + c.model_id + "'");
  }
  make_test_function(c.g_id);
  if (!is_power_of_two(c.n_fine)) throw ConfigError("n_fine must be a power of two");
  if (c.levels.empty()) throw ConfigError("level ladder is empty");
  for (std::size_t n : c.levels) {
    if (n == 0 || c.n_fine % n != 0 || n > c.n_fine / 8) {
      throw ConfigError("level " + std::to_string(n) +
                        " must divide n_fine and be at most n_fine / 8");
    }
  }
  if (!std::is_sorted(c.levels.begin(), c.levels.end()) ||
      std::adjacent_find(c.levels.begin(), c.levels.end()) != c.levels.end()) {
    throw ConfigError("levels must be strictly increasing");
  }
  if (c.test_level == 0 || c.n_fine % c.test_level != 0 || c.test_level > c.n_fine / 8) {
    throw ConfigError("test_level must divide n_fine and be at most n_fine / 8");
  }
  if (c.paths == 0 || c.particles == 0 || c.limit_lattices == 0) {
    throw ConfigError("paths, particles and limit_lattices must be positive");
  }
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "model = " << c.model_id << '\n'
      << "scheme = " << to_string(c.scheme) << '\n'
      << "g = " << c.g_id << '\n'
      << "n_fine = " << c.n_fine << '\n'
      << "levels = " << join(c.levels) << '\n'
      << "paths = " << c.paths << '\n'
      << "particles = " << c.particles << '\n'
      << "seed = " << c.seed << '\n'
      << "suites = " << join(c.suites) << '\n'
      << "sign_convention = " << to_string(c.sign) << '\n'
      << "test_level = " << c.test_level << '\n'
      << "normalized = " << (c.normalized ? "true" : "false") << '\n'
      << "limit_lattices = " << c.limit_lattices << '\n';
  for (const auto& [name, field] : kThresholdFields) {
    out << "threshold." << name << " = " << format_double(c.thresholds.*field) << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json th;
  for (const auto& [name, field] : kThresholdFields) th[name] = c.thresholds.*field;
  return {{"model", c.model_id},
          {"scheme", to_string(c.scheme)},
          {"g", c.g_id},
          {"n_fine", c.n_fine},
          {"levels", c.levels},
          {"paths", c.paths},
          {"particles", c.particles},
          {"seed", c.seed},
          {"suites", c.suites},
          {"sign_convention", to_string(c.sign)},
          {"test_level", c.test_level},
          {"normalized", c.normalized},
          {"limit_lattices", c.limit_lattices},
          {"thresholds", th}};
}

}  // namespace filterlab
