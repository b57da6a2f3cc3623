#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "minimax_lab/tasks.hpp"
#include "minimax_lab/weighting.hpp"

namespace minimax_lab {

/// Raised on any config problem; key names the offending entry.
struct ConfigError : std::runtime_error {
  std::string key;
  ConfigError(std::string key_, const std::string& message)
      : std::runtime_error("config key '" + key_ + "': " + message), key(std::move(key_)) {}
};

/// Flat `key = value` file with dotted keys, '#' comments and blank lines.
/// Every key must be consumed by a typed getter; leftovers are rejected.
class ConfigMap {
 public:
  static ConfigMap parse_file(const std::string& path);
  static ConfigMap parse_string(const std::string& text);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback);
  std::string require_string(const std::string& key);
  double get_double(const std::string& key, double fallback);
  std::size_t get_size(const std::string& key, std::size_t fallback);
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
  std::vector<double> get_doubles(const std::string& key);       // "1, 0.5"
  std::vector<std::size_t> get_sizes(const std::string& key);    // "100, 400"
  std::vector<Vec> get_points(const std::string& key);           // "0,0 ; 1,0"

  /// Throws ConfigError on the first unconsumed (unknown) key.
  void ensure_consumed() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> consumed_;
};

/// Fully validated experiment configuration.
struct ExperimentConfig {
  std::string study;  // optional; subcommand wins
  std::uint64_t seed = 1;
  std::string outdir;  // empty -> MINIMAX_LAB_OUTDIR or "."

  // family
  std::string family_kind = "gap";
  std::vector<Vec> centers;
  std::vector<double> curvatures;
  double noise_sigma = 0.0;
  std::size_t family_size = 4;  // T, gap families
  double domain_radius = -1.0;  // <= 0: constructor default

  // run
  Vec theta0;  // empty -> zeros
  std::string balancer = "minimax";
  std::string alpha_mode = "constant";
  double alpha_value = 1.0;
  double alpha_r0 = 0.0;  // 0: derived from the oracle
  double alpha_lipschitz = 0.0;
  std::size_t alpha_tasks = 0;
  double alpha_bound = 0.0;
  std::string step_mode = "constant";
  double eta = 0.1;
  std::size_t iterations = 1000;
  std::size_t record_every = 1;

  // studies
  std::vector<std::size_t> k_list;
  double eps = 0.05;
  double delta = 0.1;
  std::vector<std::size_t> sample_grid;
  std::size_t trials = 200;
  std::vector<std::string> methods;

  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig from_map(ConfigMap& map);

  TaskFamily make_family() const;
  Vec initial_point(const TaskFamily& family) const;
};

}  // namespace minimax_lab
