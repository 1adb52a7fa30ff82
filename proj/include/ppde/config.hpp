#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppde/experiment.hpp"

namespace ppde {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

using Json = nlohmann::json;

inline void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: \"" + where + "\" must be an object");
}

inline void reject_unknown_keys(const Json& j, const std::set<std::string>& allowed,
                                const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.contains(key))
      throw ConfigError("config: unknown key \"" + key + "\" in section \"" + where + "\"");
}

template <typename T>
T get_required(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError("config: missing key \"" + key + "\" in section \"" + where + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError("config: wrong type for \"" + where + "." + key + "\"");
  }
}

template <typename T>
T get_optional(const Json& j, const std::string& key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError("config: wrong type for \"" + where + "." + key + "\"");
  }
}

inline void reject_key(const Json& j, const std::string& key, const std::string& type) {
  if (j.contains(key))
    throw ConfigError("config: key \"" + key + "\" does not apply to family type \"" + type + "\"");
}

inline ParametricFamily parse_family(const Json& j) {
  require_object(j, "family");
  reject_unknown_keys(j, {"type", "p", "s", "k", "sigma", "mu", "r"}, "family");
  const auto type = get_required<std::string>(j, "type", "family");
  const double mu = get_required<double>(j, "mu", "family");
  ParametricFamily family;
  if (type == "t1") {
    reject_key(j, "s", type);
    reject_key(j, "k", type);
    reject_key(j, "r", type);
    family = trig_poly(get_required<int>(j, "p", "family"),
                       get_optional<double>(j, "sigma", "family", 0.0), mu);
  } else if (type == "t2" || type == "t3f" || type == "t3v") {
    reject_key(j, "sigma", type);
    reject_key(j, "k", type);
    const int s = get_required<int>(j, "s", "family");
    if (type == "t2") {
      reject_key(j, "r", type);
      family = chessboard(s, mu);
    } else if (type == "t3f") {
      family = cookies_fixed(s, mu, get_required<double>(j, "r", "family"));
    } else {
      reject_key(j, "r", type);
      family = cookies_variable(s, mu);
    }
  } else if (type == "t4") {
    reject_key(j, "s", type);
    reject_key(j, "sigma", type);
    reject_key(j, "r", type);
    family = clipped_poly(get_required<int>(j, "k", "family"), mu);
  } else {
    throw ConfigError("config: family type must be one of t1, t2, t3f, t3v, t4");
  }
  if (type != "t1" && j.contains("p")) {
    const int p = get_required<int>(j, "p", "family");
    if (p != family.p)
      throw ConfigError("config: family.p = " + std::to_string(p) + " contradicts derived p = " +
                        std::to_string(family.p));
  }
  return family;
}

}  // namespace detail

// Sections of an experiment description. Subcommands require the sections
// they consume; every present section is validated strictly.
struct ConfigFile {
  std::optional<ParametricFamily> family;
  std::optional<int> mesh_n;
  std::optional<NetworkConfig> network;
  std::optional<TrainConfig> train;
  std::optional<DataConfig> data;

  ExperimentConfig experiment(const std::string& context) const {
    auto need = [&context](const auto& opt, const char* name) -> const auto& {
      if (!opt) throw ConfigError("config: section \"" + std::string(name) + "\" required for " + context);
      return *opt;
    };
    ExperimentConfig config;
    config.family = need(family, "family");
    config.mesh_n = need(mesh_n, "mesh");
    config.network = need(network, "network");
    config.train = need(train, "train");
    config.data = need(data, "data");
    return config;
  }
};

inline ConfigFile parse_config(const nlohmann::json& root) {
  using detail::get_optional;
  using detail::get_required;
  detail::require_object(root, "<root>");
  detail::reject_unknown_keys(root, {"family", "mesh", "network", "train", "data"}, "<root>");

  ConfigFile file;
  if (root.contains("family")) file.family = detail::parse_family(root.at("family"));
  if (root.contains("mesh")) {
    const auto& j = root.at("mesh");
    detail::require_object(j, "mesh");
    detail::reject_unknown_keys(j, {"n"}, "mesh");
    file.mesh_n = get_required<int>(j, "n", "mesh");
    if (*file.mesh_n < 3) throw ConfigError("config: mesh.n must be at least 3");
  }
  if (root.contains("network")) {
    const auto& j = root.at("network");
    detail::require_object(j, "network");
    detail::reject_unknown_keys(j, {"widths", "alpha", "init_std", "seed"}, "network");
    NetworkConfig net;
    net.hidden_widths = get_required<std::vector<int>>(j, "widths", "network");
    net.alpha = get_optional<double>(j, "alpha", "network", 0.2);
    net.init_std = get_optional<double>(j, "init_std", "network", 0.1);
    net.seed = get_optional<std::uint64_t>(j, "seed", "network", 1);
    if (!(net.alpha >= 0.0 && net.alpha < 1.0))
      throw ConfigError("config: network.alpha must lie in [0,1)");
    for (int w : net.hidden_widths)
      if (w < 1) throw ConfigError("config: network.widths entries must be positive");
    file.network = net;
  }
  if (root.contains("train")) {
    const auto& j = root.at("train");
    detail::require_object(j, "train");
    detail::reject_unknown_keys(j, {"batch", "lr", "beta1", "beta2", "eps", "epochs", "seed"}, "train");
    TrainConfig train;
    train.batch_size = get_optional<int>(j, "batch", "train", 256);
    train.lr = get_optional<double>(j, "lr", "train", 2.0e-4);
    train.beta1 = get_optional<double>(j, "beta1", "train", 0.9);
    train.beta2 = get_optional<double>(j, "beta2", "train", 0.999);
    train.eps = get_optional<double>(j, "eps", "train", 1.0e-8);
    train.epochs = get_required<int>(j, "epochs", "train");
    train.seed = get_optional<std::uint64_t>(j, "seed", "train", 1);
    if (train.batch_size < 1) throw ConfigError("config: train.batch must be positive");
    if (train.epochs < 1) throw ConfigError("config: train.epochs must be positive");
    if (!(train.beta1 > 0 && train.beta1 < 1 && train.beta2 > 0 && train.beta2 < 1))
      throw ConfigError("config: train.beta1/beta2 must lie in (0,1)");
    if (!(train.eps > 0)) throw ConfigError("config: train.eps must be positive");
    file.train = train;
  }
  if (root.contains("data")) {
    const auto& j = root.at("data");
    detail::require_object(j, "data");
    detail::reject_unknown_keys(j, {"n_train", "n_test", "seed"}, "data");
    DataConfig data;
    data.n_train = get_required<int>(j, "n_train", "data");
    data.n_test = get_required<int>(j, "n_test", "data");
    data.seed = get_optional<std::uint64_t>(j, "seed", "data", 1);
    if (data.n_train < 1 || data.n_test < 1)
      throw ConfigError("config: data.n_train and data.n_test must be positive");
    file.data = data;
  }
  return file;
}

inline ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: invalid JSON in " + path.string() + ": " + e.what());
  }
  return parse_config(root);
}

}  // namespace ppde
