#include "minimax_lab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace minimax_lab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(trim(current));
  return parts;
}

}  // namespace

ConfigMap ConfigMap::parse_string(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no), "empty key");
    }
    if (map.values_.count(key)) throw ConfigError(key, "duplicate key");
    map.values_[key] = value;
    map.consumed_[key] = false;
  }
  return map;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

bool ConfigMap::has(const std::string& key) const { return values_.count(key) > 0; }

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  return it->second;
}

std::string ConfigMap::require_string(const std::string& key) {
  if (!has(key)) throw ConfigError(key, "missing required key");
  return get_string(key, "");
}

double ConfigMap::get_double(const std::string& key, double fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  return parse_double(key, it->second);
}

std::size_t ConfigMap::get_size(const std::string& key, std::size_t fallback) {
  const double v = get_double(key, static_cast<double>(fallback));
  if (v < 0 || v != std::floor(v)) throw ConfigError(key, "expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

std::uint64_t ConfigMap::get_u64(const std::string& key, std::uint64_t fallback) {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  consumed_[key] = true;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an unsigned integer, got '" + it->second + "'");
  }
}

std::vector<double> ConfigMap::get_doubles(const std::string& key) {
  std::vector<double> out;
  auto it = values_.find(key);
  if (it == values_.end()) return out;
  consumed_[key] = true;
  for (const std::string& part : split(it->second, ',')) {
    if (part.empty()) throw ConfigError(key, "empty list entry");
    out.push_back(parse_double(key, part));
  }
  return out;
}

std::vector<std::size_t> ConfigMap::get_sizes(const std::string& key) {
  std::vector<std::size_t> out;
  for (double v : get_doubles(key)) {
    if (v < 0 || v != std::floor(v)) throw ConfigError(key, "expected integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<Vec> ConfigMap::get_points(const std::string& key) {
  std::vector<Vec> out;
  auto it = values_.find(key);
  if (it == values_.end()) return out;
  consumed_[key] = true;
  for (const std::string& point : split(it->second, ';')) {
    if (point.empty()) throw ConfigError(key, "empty point");
    Vec coords;
    for (const std::string& part : split(point, ',')) {
      coords.push_back(parse_double(key, part));
    }
    out.push_back(std::move(coords));
  }
  return out;
}

void ConfigMap::ensure_consumed() const {
  for (const auto& [key, used] : consumed_) {
    if (!used) throw ConfigError(key, "unknown key");
  }
}

ExperimentConfig ExperimentConfig::from_map(ConfigMap& map) {
  ExperimentConfig cfg;
  cfg.study = map.get_string("study", "");
  cfg.seed = map.get_u64("seed", cfg.seed);
  cfg.outdir = map.get_string("outdir", "");

  cfg.family_kind = map.get_string("family.kind", cfg.family_kind);
  if (cfg.family_kind != "gap" && cfg.family_kind != "quadratic") {
    throw ConfigError("family.kind", "expected 'quadratic' or 'gap'");
  }
  cfg.centers = map.get_points("family.centers");
  cfg.curvatures = map.get_doubles("family.curvatures");
  if (cfg.family_kind == "quadratic") {
    if (cfg.centers.empty()) {
      throw ConfigError("family.centers", "required for quadratic families");
    }
    if (cfg.centers.size() != cfg.curvatures.size()) {
      throw ConfigError("family.curvatures", "length differs from family.centers");
    }
    for (double c : cfg.curvatures) {
      if (!(c > 0.0)) throw ConfigError("family.curvatures", "must be positive");
    }
  }
  cfg.noise_sigma = map.get_double("family.noise_sigma", 0.0);
  if (cfg.noise_sigma < 0.0) throw ConfigError("family.noise_sigma", "must be >= 0");
  cfg.family_size = map.get_size("family.T", cfg.family_size);
  cfg.domain_radius = map.get_double("family.domain_radius", cfg.domain_radius);

  if (map.has("theta0")) cfg.theta0 = map.get_doubles("theta0");

  cfg.balancer = map.get_string("balancer", cfg.balancer);
  const std::vector<std::string> balancers = {"minimax", "none", "uncertainty", "gradnorm",
                                              "dwa"};
  if (std::find(balancers.begin(), balancers.end(), cfg.balancer) == balancers.end()) {
    throw ConfigError("balancer", "unknown balancer '" + cfg.balancer + "'");
  }

  cfg.alpha_mode = map.get_string("alpha.mode", cfg.alpha_mode);
  if (cfg.alpha_mode != "constant" && cfg.alpha_mode != "theoretical") {
    throw ConfigError("alpha.mode", "expected 'constant' or 'theoretical'");
  }
  cfg.alpha_value = map.get_double("alpha.value", cfg.alpha_value);
  if (cfg.alpha_value < 0.0) throw ConfigError("alpha.value", "must be >= 0");
  cfg.alpha_r0 = map.get_double("alpha.R0", 0.0);
  cfg.alpha_lipschitz = map.get_double("alpha.Lp", 0.0);
  cfg.alpha_tasks = map.get_size("alpha.T", 0);
  cfg.alpha_bound = map.get_double("alpha.B", 0.0);

  cfg.step_mode = map.get_string("step.mode", cfg.step_mode);
  if (cfg.step_mode != "constant" && cfg.step_mode != "theoretical") {
    throw ConfigError("step.mode", "expected 'constant' or 'theoretical'");
  }
  cfg.eta = map.get_double("step.eta", cfg.eta);
  if (!(cfg.eta >= 0.0)) throw ConfigError("step.eta", "must be >= 0");

  cfg.iterations = map.get_size("K", cfg.iterations);
  if (cfg.iterations < 1) throw ConfigError("K", "must be >= 1");
  cfg.record_every = map.get_size("record_every", cfg.record_every);
  if (cfg.record_every < 1) throw ConfigError("record_every", "must be >= 1");

  cfg.k_list = map.get_sizes("K_list");
  cfg.eps = map.get_double("eps", cfg.eps);
  if (!(cfg.eps > 0.0 && cfg.eps < 1.0)) throw ConfigError("eps", "must be in (0,1)");
  cfg.delta = map.get_double("delta", cfg.delta);
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigError("delta", "must be in (0,1)");
  cfg.sample_grid = map.get_sizes("N_grid");
  cfg.trials = map.get_size("trials", cfg.trials);
  if (cfg.trials < 1) throw ConfigError("trials", "must be >= 1");
  if (map.has("methods")) {
    for (const std::string& m : split(map.get_string("methods", ""), ',')) {
      cfg.methods.push_back(m);
    }
  }

  map.ensure_consumed();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  ConfigMap map = ConfigMap::parse_file(path);
  return from_map(map);
}

TaskFamily ExperimentConfig::make_family() const {
  if (family_kind == "gap") {
    if (family_size < 2) throw ConfigError("family.T", "gap family needs T >= 2");
    return gap_family(family_size, noise_sigma,
                      domain_radius > 0.0 ? domain_radius : 1.0);
  }
  if (centers.empty()) throw ConfigError("family.centers", "required for quadratic families");
  if (centers.size() != curvatures.size()) {
    throw ConfigError("family.curvatures", "length differs from family.centers");
  }
  for (double c : curvatures) {
    if (!(c > 0.0)) throw ConfigError("family.curvatures", "must be positive");
  }
  return quadratic_family(centers, curvatures, noise_sigma, domain_radius);
}

Vec ExperimentConfig::initial_point(const TaskFamily& family) const {
  if (theta0.empty()) return Vec(family.dim, 0.0);
  if (theta0.size() != family.dim) {
    throw ConfigError("theta0", "dimension differs from the family");
  }
  return theta0;
}

}  // namespace minimax_lab
