#include "intact/config.hpp"

#include <fstream>
#include <set>

#include "intact/common.hpp"

namespace intact {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& scope) {
  if (!j.is_object()) throw ConfigError(scope + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError(scope + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad value for '") + key + "'");
  }
}

constexpr double kAlphaPointReach = 0.005;  // reacher-class default
constexpr double kAlphaVoltVar = 0.05;

}  // namespace

TrainConfig parse_train_config(const json& j) {
  check_keys(j, {"env", "agent", "label", "alpha", "gamma", "polyak", "stgs_tau", "lr", "hidden",
                 "batch", "buffer", "warmup", "exact_entropy", "clip_eps", "gae_lambda", "rollout",
                 "minibatch", "epochs", "total_steps", "eval_interval", "eval_episodes", "seeds",
                 "out_dir"},
             "config");

  TrainConfig c;
  if (!j.contains("env")) throw ConfigError("config: missing 'env'");
  check_keys(j.at("env"), {"id", "bins", "feeder_file"}, "config.env");
  c.env.id = get_or<std::string>(j.at("env"), "id", "");
  c.env.bins = get_or<int>(j.at("env"), "bins", 0);
  c.env.feeder_file = get_or<std::string>(j.at("env"), "feeder_file", "");

  if (c.env.id != "point_reach" && c.env.id != "volt_var") {
    throw ConfigError("config.env.id: expected 'point_reach' or 'volt_var', got '" + c.env.id + "'");
  }
  if (c.env.bins != 0 && c.env.bins < 2) {
    throw ConfigError("config.env.bins: need 0 (native) or >= 2");
  }
  if (c.env.id == "volt_var" && c.env.bins != 0) {
    throw ConfigError("config.env.bins: volt_var is natively integer; bins must be omitted");
  }
  if (c.env.id == "point_reach" && !c.env.feeder_file.empty()) {
    throw ConfigError("config.env.feeder_file: only valid for volt_var");
  }

  c.agent = get_or<std::string>(j, "agent", "");
  const bool known_agent = c.agent == "sac_continuous" || c.agent == "sac_integer" ||
                           c.agent == "ppo_integer" || c.agent == "random";
  if (!known_agent) {
    throw ConfigError("config.agent: expected sac_continuous | sac_integer | ppo_integer | random, "
                      "got '" + c.agent + "'");
  }
  if (c.agent == "sac_continuous" && (c.env.id != "point_reach" || c.env.bins != 0)) {
    throw ConfigError("config.agent: sac_continuous needs a continuous env (point_reach, bins 0)");
  }
  const bool integer_agent = c.agent == "sac_integer" || c.agent == "ppo_integer";
  if (integer_agent && c.env.id == "point_reach" && c.env.bins < 2) {
    throw ConfigError("config.env.bins: integer agents on point_reach need bins >= 2");
  }

  c.alpha = get_or<double>(j, "alpha", c.env.id == "point_reach" ? kAlphaPointReach : kAlphaVoltVar);
  if (c.alpha < 0.0) throw ConfigError("config.alpha: must be >= 0");
  c.gamma = get_or<double>(j, "gamma", c.gamma);
  if (c.gamma <= 0.0 || c.gamma >= 1.0) throw ConfigError("config.gamma: must lie in (0, 1)");
  c.polyak = get_or<double>(j, "polyak", c.polyak);
  if (c.polyak <= 0.0 || c.polyak > 1.0) throw ConfigError("config.polyak: must lie in (0, 1]");
  c.stgs_tau = get_or<double>(j, "stgs_tau", c.stgs_tau);
  if (c.stgs_tau <= 0.0) throw ConfigError("config.stgs_tau: must be positive");
  c.lr = get_or<double>(j, "lr", c.lr);
  if (c.lr <= 0.0) throw ConfigError("config.lr: must be positive");
  c.hidden = get_or<std::vector<int>>(j, "hidden", c.hidden);
  if (c.hidden.empty()) throw ConfigError("config.hidden: need at least one hidden width");
  for (const int h : c.hidden) {
    if (h < 1) throw ConfigError("config.hidden: widths must be positive");
  }
  c.batch = get_or<int>(j, "batch", c.batch);
  if (c.batch < 1) throw ConfigError("config.batch: must be >= 1");
  c.buffer = get_or<long>(j, "buffer", c.buffer);
  if (c.buffer < c.batch) throw ConfigError("config.buffer: must hold at least one batch");
  c.warmup = get_or<int>(j, "warmup", c.warmup);
  if (c.warmup < 0) throw ConfigError("config.warmup: must be >= 0");
  c.exact_entropy = get_or<bool>(j, "exact_entropy", c.exact_entropy);

  c.clip_eps = get_or<double>(j, "clip_eps", c.clip_eps);
  if (c.clip_eps < 0.0) throw ConfigError("config.clip_eps: must be >= 0");
  c.gae_lambda = get_or<double>(j, "gae_lambda", c.gae_lambda);
  if (c.gae_lambda < 0.0 || c.gae_lambda > 1.0) throw ConfigError("config.gae_lambda: must lie in [0, 1]");
  c.rollout = get_or<int>(j, "rollout", c.rollout);
  if (c.rollout < 1) throw ConfigError("config.rollout: must be >= 1");
  c.minibatch = get_or<int>(j, "minibatch", c.minibatch);
  if (c.minibatch < 1 || c.minibatch > c.rollout) {
    throw ConfigError("config.minibatch: must lie in [1, rollout]");
  }
  c.epochs = get_or<int>(j, "epochs", c.epochs);
  if (c.epochs < 1) throw ConfigError("config.epochs: must be >= 1");

  c.total_steps = get_or<long>(j, "total_steps", 0L);
  if (c.total_steps < 1) throw ConfigError("config.total_steps: must be >= 1");
  c.eval_interval = get_or<long>(j, "eval_interval", std::max(1L, c.total_steps / 20));
  if (c.eval_interval < 1 || c.eval_interval > c.total_steps) {
    throw ConfigError("config.eval_interval: must lie in [1, total_steps]");
  }
  c.eval_episodes = get_or<int>(j, "eval_episodes", c.eval_episodes);
  if (c.eval_episodes < 1) throw ConfigError("config.eval_episodes: must be >= 1");
  c.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", c.seeds);
  if (c.seeds.empty()) throw ConfigError("config.seeds: need at least one seed");
  c.out_dir = get_or<std::string>(j, "out_dir", "");
  if (c.out_dir.empty()) throw ConfigError("config.out_dir: required");

  std::string default_label = c.agent;
  if (c.env.bins >= 2) default_label += "_d" + std::to_string(c.env.bins);
  c.label = get_or<std::string>(j, "label", default_label);
  return c;
}

TrainConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not readable: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file parse error: " + std::string(e.what()));
  }
  return parse_train_config(j);
}

json to_json(const TrainConfig& c) {
  json j;
  j["env"] = {{"id", c.env.id}, {"bins", c.env.bins}, {"feeder_file", c.env.feeder_file}};
  j["agent"] = c.agent;
  j["label"] = c.label;
  j["alpha"] = c.alpha;
  j["gamma"] = c.gamma;
  j["polyak"] = c.polyak;
  j["stgs_tau"] = c.stgs_tau;
  j["lr"] = c.lr;
  j["hidden"] = c.hidden;
  j["batch"] = c.batch;
  j["buffer"] = c.buffer;
  j["warmup"] = c.warmup;
  j["exact_entropy"] = c.exact_entropy;
  j["clip_eps"] = c.clip_eps;
  j["gae_lambda"] = c.gae_lambda;
  j["rollout"] = c.rollout;
  j["minibatch"] = c.minibatch;
  j["epochs"] = c.epochs;
  j["total_steps"] = c.total_steps;
  j["eval_interval"] = c.eval_interval;
  j["eval_episodes"] = c.eval_episodes;
  j["seeds"] = c.seeds;
  j["out_dir"] = c.out_dir;
  return j;
}

}  // namespace intact
