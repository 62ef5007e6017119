#ifndef SADIH_CONFIG_HPP_
#define SADIH_CONFIG_HPP_

// Flat "key = value" training configuration. '#' starts a comment.
// Command-line flags override file values.

#include <fstream>
#include <map>
#include <set>
#include <string>

#include "sadih/error.hpp"
#include "sadih/optimizer.hpp"

namespace sadih {

using ConfigMap = std::map<std::string, std::string>;

inline const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys = {"alpha",   "beta",   "gamma",    "bits",
                                             "variant", "iters",  "seed",     "anchors",
                                             "sigma",   "features", "labels", "out",
                                             "tolerance"};
  return keys;
}

inline ConfigMap parse_config(std::istream& in, const std::string& source) {
  ConfigMap out;
  std::string line;
  int line_no = 0;
  auto trim = [](const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!config_keys().contains(key)) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

inline ConfigMap load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

struct TrainConfig {
  Hyperparams hyper;
  Index anchors = 0;   // 0 disables the anchor lift
  double sigma = 0.0;  // <= 0 selects the default kernel width
  std::string features;
  std::string labels;
  std::string out;
};

namespace detail {

template <typename T>
T convert(const ConfigMap& map, const std::string& key, T fallback) {
  const auto it = map.find(key);
  if (it == map.end()) return fallback;
  const std::string& text = it->second;
  try {
    std::size_t used = 0;
    T value{};
    if constexpr (std::is_same_v<T, double>) {
      value = std::stod(text, &used);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
      value = std::stoull(text, &used);
    } else {
      value = static_cast<T>(std::stoll(text, &used));
    }
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw ConfigError("config field '" + key + "': invalid value '" + text + "'");
  }
}

}  // namespace detail

inline TrainConfig make_train_config(const ConfigMap& map, bool require_paths = true) {
  TrainConfig cfg;
  Hyperparams& h = cfg.hyper;
  h.alpha = detail::convert(map, "alpha", h.alpha);
  h.beta = detail::convert(map, "beta", h.beta);
  h.gamma = detail::convert(map, "gamma", h.gamma);
  h.bits = detail::convert(map, "bits", h.bits);
  h.max_iters = detail::convert(map, "iters", h.max_iters);
  h.seed = detail::convert(map, "seed", h.seed);
  h.tolerance = detail::convert(map, "tolerance", h.tolerance);
  if (const auto it = map.find("variant"); it != map.end()) {
    try {
      h.variant = parse_variant(it->second);
    } catch (const ConfigError&) {
      throw ConfigError("config field 'variant': expected L1 or L21, got '" + it->second + "'");
    }
  }
  cfg.anchors = detail::convert<Index>(map, "anchors", 0);
  cfg.sigma = detail::convert(map, "sigma", 0.0);
  auto path = [&](const char* key) {
    const auto it = map.find(key);
    if (it == map.end() || it->second.empty()) {
      if (require_paths) throw ConfigError(std::string("config field '") + key + "' is required");
      return std::string();
    }
    return it->second;
  };
  cfg.features = path("features");
  cfg.labels = path("labels");
  cfg.out = path("out");

  auto check = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(std::string("config field '") + key + "': " + what);
  };
  check(h.alpha >= 0, "alpha", "must be nonnegative");
  check(h.beta >= 0, "beta", "must be nonnegative");
  check(h.gamma > 0, "gamma", "must be positive");
  check(h.bits >= 1, "bits", "must be at least 1");
  check(h.max_iters >= 1, "iters", "must be at least 1");
  check(h.tolerance >= 0, "tolerance", "must be nonnegative");
  check(cfg.anchors >= 0, "anchors", "must be nonnegative");
  check(cfg.sigma >= 0, "sigma", "must be nonnegative");
  return cfg;
}

}  // namespace sadih

#endif  // SADIH_CONFIG_HPP_
