#include "intact/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "intact/point_reach.hpp"
#include "intact/ppo.hpp"
#include "intact/sac.hpp"
#include "intact/volt_var.hpp"

namespace intact::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

class MetricsWriter {
 public:
  MetricsWriter(const fs::path& path, std::uint64_t seed)
      : out_(path), seed_(seed), start_(Clock::now()) {
    if (!out_) throw ConfigError("cannot open metrics file: " + path.string());
  }

  void write(json record) {
    record["seed"] = seed_;
    record["wall_clock"] = std::chrono::duration<double>(Clock::now() - start_).count();
    out_ << record.dump() << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
  std::uint64_t seed_;
  Clock::time_point start_;
};

struct LossTracker {
  double sum = 0.0;
  long n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  bool any() const { return n > 0; }
  double take() {
    const double m = n > 0 ? sum / static_cast<double>(n) : 0.0;
    sum = 0.0;
    n = 0;
    return m;
  }
};

std::vector<double> uniform_continuous_action(int dim, RngStream& rng) {
  std::vector<double> a(static_cast<std::size_t>(dim));
  for (auto& v : a) v = rng.uniform(-1.0, 1.0);
  return a;
}

std::vector<int> uniform_integer_action(const IntegerActionSpec& spec, RngStream& rng) {
  std::vector<int> a(static_cast<std::size_t>(spec.dims()));
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = rng.uniform_int(spec.bins[k]);
  return a;
}

// Deterministic-policy evaluation; `policy` maps obs -> action for the env
// kind in play.
template <typename Env, typename Policy>
double eval_episodes(Env& env, int episodes, RngStream eval_rng, Policy&& policy) {
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    std::vector<double> obs = env.reset(eval_rng.child(static_cast<std::uint64_t>(e)).seed());
    bool done = false;
    while (!done) {
      const EnvStep s = env.step(policy(obs, e));
      total += s.reward;
      obs = s.obs;
      done = s.done;
    }
  }
  return total / static_cast<double>(episodes);
}

json agent_checkpoint_stub(const TrainConfig& cfg, std::uint64_t seed) {
  json j;
  j["format"] = "intact-checkpoint-v1";
  j["config"] = to_json(cfg);
  j["seed"] = seed;
  return j;
}

void write_checkpoint(const fs::path& dir, const json& j) {
  std::ofstream out(dir / "checkpoint.json");
  out << j.dump(2) << '\n';
}

int run_seed_sac(const TrainConfig& cfg, std::uint64_t seed, const fs::path& seed_dir) {
  MetricsWriter metrics(seed_dir / "metrics.jsonl", seed);
  RngStream root(seed);
  RngStream episode_rng = root.child("episodes");
  RngStream action_rng = root.child("actions");
  RngStream warmup_rng = root.child("warmup");
  RngStream buffer_rng = root.child("buffer");
  RngStream update_rng = root.child("updates");
  RngStream agent_rng = root.child("init");

  SacConfig sc;
  sc.alpha = cfg.alpha;
  sc.gamma = cfg.gamma;
  sc.polyak = cfg.polyak;
  sc.stgs_tau = cfg.stgs_tau;
  sc.lr = cfg.lr;
  sc.batch = cfg.batch;
  sc.buffer_capacity = static_cast<std::size_t>(cfg.buffer);
  sc.warmup_steps = cfg.warmup;
  sc.exact_entropy = cfg.exact_entropy;
  sc.hidden = cfg.hidden;

  const bool integer = cfg.agent == "sac_integer";
  std::unique_ptr<ContinuousEnv> cont_env, cont_eval;
  std::unique_ptr<IntegerEnv> int_env, int_eval;
  std::unique_ptr<SacAgent> agent;
  if (integer) {
    int_env = make_integer_env(cfg.env);
    int_eval = make_integer_env(cfg.env);
    agent = std::make_unique<SacAgent>(int_env->obs_dim(), int_env->action_spec(), sc, agent_rng);
  } else {
    cont_env = make_continuous_env(cfg.env);
    cont_eval = make_continuous_env(cfg.env);
    agent = std::make_unique<SacAgent>(cont_env->obs_dim(), cont_env->action_dim(), sc, agent_rng);
  }

  ReplayBuffer buffer(sc.buffer_capacity);
  LossTracker lt_q1, lt_q2, lt_pi;

  long episode_idx = 0;
  std::vector<double> obs =
      integer ? int_env->reset(episode_rng.child(static_cast<std::uint64_t>(episode_idx)).seed())
              : cont_env->reset(episode_rng.child(static_cast<std::uint64_t>(episode_idx)).seed());
  double episode_return = 0.0;

  const auto eval_now = [&](long step) {
    double ret;
    if (integer) {
      ret = eval_episodes(*int_eval, cfg.eval_episodes, root.child("eval"),
                          [&](const std::vector<double>& o, int) {
                            return agent->act(o, /*stochastic=*/false, action_rng).indices;
                          });
    } else {
      ret = eval_episodes(*cont_eval, cfg.eval_episodes, root.child("eval"),
                          [&](const std::vector<double>& o, int) {
                            return agent->act(o, /*stochastic=*/false, action_rng).action;
                          });
    }
    json rec{{"kind", "eval"}, {"env_step", step}, {"eval_mean_return", ret}};
    if (lt_q1.any()) {
      rec["loss_q1"] = lt_q1.take();
      rec["loss_q2"] = lt_q2.take();
      rec["loss_pi"] = lt_pi.take();
      RngStream ent_rng = root.child("entropy").child(static_cast<std::uint64_t>(step));
      const auto probe = buffer.sample(
          std::min<std::size_t>(static_cast<std::size_t>(cfg.batch), buffer.size()), ent_rng);
      rec["entropy"] = agent->entropy_estimate(probe, ent_rng);
    }
    metrics.write(std::move(rec));
  };

  for (long step = 1; step <= cfg.total_steps; ++step) {
    Transition t;
    t.state = obs;
    EnvStep es;
    if (integer) {
      std::vector<int> indices;
      if (step <= cfg.warmup) {
        indices = uniform_integer_action(int_env->action_spec(), warmup_rng);
      } else {
        indices = agent->act(obs, /*stochastic=*/true, action_rng).indices;
      }
      const auto& spec = int_env->action_spec();
      t.indices = indices;
      t.action.resize(indices.size());
      for (std::size_t k = 0; k < indices.size(); ++k) {
        t.action[k] = embed_index(indices[k], spec.bins[k]);
      }
      es = int_env->step(indices);
    } else {
      std::vector<double> a;
      if (step <= cfg.warmup) {
        a = uniform_continuous_action(cont_env->action_dim(), warmup_rng);
      } else {
        a = agent->act(obs, /*stochastic=*/true, action_rng).action;
      }
      t.action = a;
      es = cont_env->step(a);
    }
    t.reward = es.reward;
    t.next_state = es.obs;
    t.done = es.done;
    episode_return += es.reward;
    obs = es.obs;
    buffer.push(std::move(t));

    if (es.done) {
      metrics.write(json{{"kind", "train_episode"},
                         {"env_step", step},
                         {"episode_return", episode_return}});
      ++episode_idx;
      obs = integer
                ? int_env->reset(episode_rng.child(static_cast<std::uint64_t>(episode_idx)).seed())
                : cont_env->reset(episode_rng.child(static_cast<std::uint64_t>(episode_idx)).seed());
      episode_return = 0.0;
    }

    if (step > cfg.warmup && buffer.size() >= static_cast<std::size_t>(cfg.batch)) {
      const auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch), buffer_rng);
      const auto [lq1, lq2] = agent->critic_update(batch, update_rng);
      const double lpi = agent->actor_update(batch, update_rng);
      agent->polyak_update();
      lt_q1.add(lq1);
      lt_q2.add(lq2);
      lt_pi.add(lpi);
      if (!std::isfinite(lq1) || !std::isfinite(lq2) || !std::isfinite(lpi)) {
        metrics.write(json{{"kind", "abort"},
                           {"env_step", step},
                           {"reason", "nan_loss"},
                           {"loss_q1", lq1},
                           {"loss_q2", lq2},
                           {"loss_pi", lpi}});
        return kExitNumericFailure;
      }
    }

    if (step % cfg.eval_interval == 0) eval_now(step);
  }

  json ckpt = agent_checkpoint_stub(cfg, seed);
  ckpt["agent"] = agent->checkpoint();
  write_checkpoint(seed_dir, ckpt);
  return kExitOk;
}

int run_seed_ppo(const TrainConfig& cfg, std::uint64_t seed, const fs::path& seed_dir) {
  MetricsWriter metrics(seed_dir / "metrics.jsonl", seed);
  RngStream root(seed);
  RngStream episode_rng = root.child("episodes");
  RngStream action_rng = root.child("actions");
  RngStream update_rng = root.child("updates");
  RngStream agent_rng = root.child("init");

  PpoConfig pc;
  pc.clip_eps = cfg.clip_eps;
  pc.gamma = cfg.gamma;
  pc.gae_lambda = cfg.gae_lambda;
  pc.lr = cfg.lr;
  pc.rollout_steps = cfg.rollout;
  pc.minibatch = cfg.minibatch;
  pc.epochs = cfg.epochs;
  pc.hidden = cfg.hidden;

  auto env = make_integer_env(cfg.env);
  auto eval_env = make_integer_env(cfg.env);
  PpoAgent agent(env->obs_dim(), env->action_spec(), pc, agent_rng);

  RolloutBatch rollout;
  LossTracker lt_pi, lt_v;
  double entropy_probe = 0.0;

  long episode_idx = 0;
  std::vector<double> obs =
      env->reset(episode_rng.child(static_cast<std::uint64_t>(episode_idx)).seed());
  double episode_return = 0.0;

  const auto eval_now = [&](long step) {
    const double ret = eval_episodes(
        *eval_env, cfg.eval_episodes, root.child("eval"),
        [&](const std::vector<double>& o, int) { return agent.act_deterministic(o); });
    json rec{{"kind", "eval"}, {"env_step", step}, {"eval_mean_return", ret}};
    if (lt_pi.any()) {
      rec["loss_pi"] = lt_pi.take();
      rec["loss_v"] = lt_v.take();
      rec["entropy"] = entropy_probe;
    }
    metrics.write(std::move(rec));
  };

  for (long step = 1; step <= cfg.total_steps; ++step) {
    const PpoAgent::Step a = agent.act(obs, action_rng);
    const EnvStep es = env->step(a.indices);
    rollout.states.push_back(obs);
    rollout.indices.push_back(a.indices);
    rollout.log_prob_old.push_back(a.log_prob);
    rollout.rewards.push_back(es.reward);
    rollout.values.push_back(a.value);
    rollout.dones.push_back(es.done ? 1.0 : 0.0);
    episode_return += es.reward;
    obs = es.obs;

    if (es.done) {
      metrics.write(json{{"kind", "train_episode"},
                         {"env_step", step},
                         {"episode_return", episode_return}});
      ++episode_idx;
      obs = env->reset(episode_rng.child(static_cast<std::uint64_t>(episode_idx)).seed());
      episode_return = 0.0;
    }

    if (static_cast<int>(rollout.size()) >= cfg.rollout) {
      // Bootstrap from the state the next transition would start from; GAE
      // masks it out when the last transition was terminal.
      Mat s(1, static_cast<Eigen::Index>(obs.size()));
      for (Eigen::Index j2 = 0; j2 < s.cols(); ++j2) s(0, j2) = obs[static_cast<std::size_t>(j2)];
      rollout.bootstrap_value = agent.value_net().forward(Var::constant(std::move(s))).payload()(0, 0);

      // Analytic policy entropy over a fixed probe of rollout states.
      const std::size_t probe_n = std::min<std::size_t>(256, rollout.size());
      Mat probe(static_cast<Eigen::Index>(probe_n), static_cast<Eigen::Index>(obs.size()));
      for (std::size_t i = 0; i < probe_n; ++i) {
        for (std::size_t j2 = 0; j2 < obs.size(); ++j2) {
          probe(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j2)) = rollout.states[i][j2];
        }
      }
      const auto heads = agent.actor().forward(Var::constant(std::move(probe)));
      entropy_probe = 0.0;
      for (const auto& h : heads) entropy_probe += softmax_entropy_rows(h).payload().mean();

      const auto [lpi, lv] = agent.update(rollout, update_rng);
      lt_pi.add(lpi);
      lt_v.add(lv);
      rollout.clear();
      if (!std::isfinite(lpi) || !std::isfinite(lv)) {
        metrics.write(json{{"kind", "abort"},
                           {"env_step", step},
                           {"reason", "nan_loss"},
                           {"loss_pi", lpi},
                           {"loss_v", lv}});
        return kExitNumericFailure;
      }
    }

    if (step % cfg.eval_interval == 0) eval_now(step);
  }

  json ckpt = agent_checkpoint_stub(cfg, seed);
  ckpt["agent"] = agent.checkpoint();
  write_checkpoint(seed_dir, ckpt);
  return kExitOk;
}

int run_seed_random(const TrainConfig& cfg, std::uint64_t seed, const fs::path& seed_dir) {
  MetricsWriter metrics(seed_dir / "metrics.jsonl", seed);
  RngStream root(seed);

  const bool continuous = cfg.env.id == "point_reach" && cfg.env.bins == 0;
  std::unique_ptr<ContinuousEnv> cont_env;
  std::unique_ptr<IntegerEnv> int_env;
  if (continuous) {
    cont_env = make_continuous_env(cfg.env);
  } else {
    int_env = make_integer_env(cfg.env);
  }

  for (long step = cfg.eval_interval; step <= cfg.total_steps; step += cfg.eval_interval) {
    RngStream eval_rng = root.child("eval");
    RngStream act_rng = eval_rng.child("actions");
    double ret;
    if (continuous) {
      ret = eval_episodes(*cont_env, cfg.eval_episodes, eval_rng,
                          [&](const std::vector<double>&, int) {
                            return uniform_continuous_action(cont_env->action_dim(), act_rng);
                          });
    } else {
      ret = eval_episodes(*int_env, cfg.eval_episodes, eval_rng,
                          [&](const std::vector<double>&, int) {
                            return uniform_integer_action(int_env->action_spec(), act_rng);
                          });
    }
    metrics.write(json{{"kind", "eval"}, {"env_step", step}, {"eval_mean_return", ret}});
  }

  json ckpt = agent_checkpoint_stub(cfg, seed);
  ckpt["agent"] = json{{"kind", "random"}};
  write_checkpoint(seed_dir, ckpt);
  return kExitOk;
}

}  // namespace

std::unique_ptr<ContinuousEnv> make_continuous_env(const EnvConfig& cfg) {
  if (cfg.id != "point_reach" || cfg.bins != 0) {
    throw ConfigError("make_continuous_env: '" + cfg.id + "' (bins " + std::to_string(cfg.bins) +
                      ") is not a continuous env");
  }
  return std::make_unique<PointReachEnv>();
}

std::unique_ptr<IntegerEnv> make_integer_env(const EnvConfig& cfg) {
  if (cfg.id == "point_reach") {
    if (cfg.bins < 2) throw ConfigError("make_integer_env: point_reach needs bins >= 2");
    return std::make_unique<DiscretizedWrapper>(std::make_unique<PointReachEnv>(), cfg.bins);
  }
  if (cfg.id == "volt_var") {
    if (!cfg.feeder_file.empty()) {
      return std::make_unique<VoltVarToyEnv>(std::filesystem::path(cfg.feeder_file));
    }
    return std::make_unique<VoltVarToyEnv>();
  }
  throw ConfigError("make_integer_env: unknown env '" + cfg.id + "'");
}

int run_seed(const TrainConfig& cfg, std::uint64_t seed, const fs::path& seed_dir) {
  fs::create_directories(seed_dir);
  if (cfg.agent == "sac_integer" || cfg.agent == "sac_continuous") {
    return run_seed_sac(cfg, seed, seed_dir);
  }
  if (cfg.agent == "ppo_integer") return run_seed_ppo(cfg, seed, seed_dir);
  if (cfg.agent == "random") return run_seed_random(cfg, seed, seed_dir);
  throw ConfigError("run_seed: unknown agent '" + cfg.agent + "'");
}

RunOutcome run(const TrainConfig& cfg) {
  RunOutcome out;
  try {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    {
      std::ofstream echo(dir / "config_resolved.json");
      if (!echo) throw ConfigError("cannot write to out_dir: " + cfg.out_dir);
      echo << to_json(cfg).dump(2) << '\n';
    }

    std::vector<int> codes(cfg.seeds.size(), kExitOk);
    std::vector<std::string> errors(cfg.seeds.size());
    std::vector<std::thread> workers;
    workers.reserve(cfg.seeds.size());
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
      workers.emplace_back([&, i] {
        const std::uint64_t seed = cfg.seeds[i];
        try {
          codes[i] = run_seed(cfg, seed, dir / ("seed_" + std::to_string(seed)));
        } catch (const std::exception& e) {
          codes[i] = kExitNumericFailure;
          errors[i] = e.what();
        }
      });
    }
    for (auto& w : workers) w.join();

    for (std::size_t i = 0; i < codes.size(); ++i) {
      if (codes[i] != kExitOk) {
        out.exit_code = std::max(out.exit_code, codes[i]);
        if (!errors[i].empty()) {
          out.message += "seed " + std::to_string(cfg.seeds[i]) + ": " + errors[i] + "\n";
        }
      }
    }
  } catch (const ConfigError& e) {
    out.exit_code = kExitConfigError;
    out.message = e.what();
  } catch (const std::exception& e) {
    out.exit_code = kExitNumericFailure;
    out.message = e.what();
  }
  return out;
}

// ---- aggregation -------------------------------------------------------------

namespace {

struct EvalSeries {
  std::uint64_t seed = 0;
  std::vector<long> steps;
  std::vector<double> returns;
};

struct RunData {
  std::string label;
  long total_steps = 0;
  std::vector<EvalSeries> seeds;
};

RunData load_run(const fs::path& dir) {
  std::ifstream cfg_in(dir / "config_resolved.json");
  if (!cfg_in) throw ConfigError("not a run directory (missing config_resolved.json): " + dir.string());
  json cfg_j;
  cfg_in >> cfg_j;
  RunData run;
  run.label = cfg_j.value("label", dir.filename().string());
  run.total_steps = cfg_j.value("total_steps", 0L);

  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_directory()) continue;
    const fs::path metrics = entry.path() / "metrics.jsonl";
    if (!fs::exists(metrics)) continue;
    EvalSeries series;
    std::ifstream in(metrics);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json rec = json::parse(line);
      if (rec.value("kind", "") != "eval") continue;
      series.seed = rec.value("seed", 0ull);
      series.steps.push_back(rec.at("env_step").get<long>());
      series.returns.push_back(rec.at("eval_mean_return").get<double>());
    }
    if (!series.steps.empty()) run.seeds.push_back(std::move(series));
  }
  if (run.seeds.empty()) throw ConfigError("run has no eval records: " + dir.string());
  std::sort(run.seeds.begin(), run.seeds.end(),
            [](const EvalSeries& a, const EvalSeries& b) { return a.seed < b.seed; });
  return run;
}

double interp_at(const EvalSeries& s, long step) {
  if (step <= s.steps.front()) return s.returns.front();
  if (step >= s.steps.back()) return s.returns.back();
  for (std::size_t i = 1; i < s.steps.size(); ++i) {
    if (s.steps[i] >= step) {
      const double t = static_cast<double>(step - s.steps[i - 1]) /
                       static_cast<double>(s.steps[i] - s.steps[i - 1]);
      return s.returns[i - 1] + t * (s.returns[i] - s.returns[i - 1]);
    }
  }
  return s.returns.back();
}

}  // namespace

std::vector<Curve> aggregate_runs(const std::vector<fs::path>& run_dirs,
                                  std::vector<std::string>* warnings) {
  if (run_dirs.empty()) throw ConfigError("aggregate_runs: need at least one run directory");
  std::vector<Curve> curves;
  for (const auto& dir : run_dirs) {
    const RunData run = load_run(dir);

    // Coarsest grid among the seeds; others are linearly resampled onto it.
    const EvalSeries* coarsest = &run.seeds.front();
    bool mismatch = false;
    for (const auto& s : run.seeds) {
      if (s.steps != coarsest->steps) mismatch = true;
      if (s.steps.size() < coarsest->steps.size()) coarsest = &s;
    }
    if (mismatch && warnings) {
      warnings->push_back("run '" + run.label + "': eval grids differ across seeds; resampled to " +
                          std::to_string(coarsest->steps.size()) + " points");
    }

    Curve c;
    c.label = run.label;
    for (const long step : coarsest->steps) {
      double sum = 0.0, sq = 0.0;
      for (const auto& s : run.seeds) {
        const double v = interp_at(s, step);
        sum += v;
        sq += v * v;
      }
      const double n = static_cast<double>(run.seeds.size());
      const double m = sum / n;
      const double var = std::max(0.0, sq / n - m * m);
      c.points.push_back({step, m, std::sqrt(var)});
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void write_curves_csv(const fs::path& path, const std::vector<Curve>& curves) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write curves CSV: " + path.string());
  out << "label,step,mean,std\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out << c.label << ',' << p.step << ',' << fmt(p.mean) << ',' << fmt(p.stddev) << '\n';
    }
  }
}

std::vector<Curve> read_curves_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read curves CSV: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "label,step,mean,std") {
    throw ConfigError("curves CSV: bad header");
  }
  std::vector<Curve> curves;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string label, step_s, mean_s, std_s;
    if (!std::getline(ss, label, ',') || !std::getline(ss, step_s, ',') ||
        !std::getline(ss, mean_s, ',') || !std::getline(ss, std_s, ',')) {
      throw ConfigError("curves CSV: bad row: " + line);
    }
    if (curves.empty() || curves.back().label != label) {
      curves.push_back({label, {}});
    }
    curves.back().points.push_back({std::stol(step_s), std::stod(mean_s), std::stod(std_s)});
  }
  return curves;
}

double SvgLayout::x(double step) const {
  const double w = kSvgWidth - kSvgMarginLeft - kSvgMarginRight;
  const double span = std::max(1.0, step_max - step_min);
  return kSvgMarginLeft + (step - step_min) / span * w;
}

double SvgLayout::y(double value) const {
  const double h = kSvgHeight - kSvgMarginTop - kSvgMarginBottom;
  const double span = value_max - value_min;
  return kSvgMarginTop + (1.0 - (value - value_min) / (span == 0.0 ? 1.0 : span)) * h;
}

double SvgLayout::step_from_x(double px) const {
  const double w = kSvgWidth - kSvgMarginLeft - kSvgMarginRight;
  const double span = std::max(1.0, step_max - step_min);
  return step_min + (px - kSvgMarginLeft) / w * span;
}

double SvgLayout::value_from_y(double py) const {
  const double h = kSvgHeight - kSvgMarginTop - kSvgMarginBottom;
  const double span = value_max - value_min;
  return value_min + (1.0 - (py - kSvgMarginTop) / h) * (span == 0.0 ? 1.0 : span);
}

SvgLayout compute_svg_layout(const std::vector<Curve>& curves) {
  SvgLayout l;
  bool first = true;
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      const double lo = p.mean - p.stddev;
      const double hi = p.mean + p.stddev;
      if (first) {
        l.step_min = l.step_max = static_cast<double>(p.step);
        l.value_min = lo;
        l.value_max = hi;
        first = false;
      } else {
        l.step_min = std::min(l.step_min, static_cast<double>(p.step));
        l.step_max = std::max(l.step_max, static_cast<double>(p.step));
        l.value_min = std::min(l.value_min, lo);
        l.value_max = std::max(l.value_max, hi);
      }
    }
  }
  return l;
}

void write_curves_svg(const fs::path& path, const std::vector<Curve>& curves) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
  const SvgLayout l = compute_svg_layout(curves);

  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write SVG: " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSvgWidth << "\" height=\""
      << kSvgHeight << "\" viewBox=\"0 0 " << kSvgWidth << " " << kSvgHeight << "\">\n";
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // axes
  const double x0 = kSvgMarginLeft, x1 = kSvgWidth - kSvgMarginRight;
  const double y0 = kSvgHeight - kSvgMarginBottom, y1 = kSvgMarginTop;
  out << "  <line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
      << "\" stroke=\"black\"/>\n";
  out << "  <line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
      << "\" stroke=\"black\"/>\n";
  out << "  <text x=\"" << x0 << "\" y=\"" << (y0 + 30) << "\" font-size=\"12\">" << l.step_min
      << "</text>\n";
  out << "  <text x=\"" << (x1 - 40) << "\" y=\"" << (y0 + 30) << "\" font-size=\"12\">"
      << l.step_max << "</text>\n";
  out << "  <text x=\"5\" y=\"" << y0 << "\" font-size=\"12\">" << fmt(l.value_min) << "</text>\n";
  out << "  <text x=\"5\" y=\"" << (y1 + 10) << "\" font-size=\"12\">" << fmt(l.value_max)
      << "</text>\n";

  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const auto& c = curves[ci];
    const char* color = kPalette[ci % (sizeof(kPalette) / sizeof(kPalette[0]))];

    // +-1 std band: upper edge forward, lower edge reversed.
    out << "  <polygon class=\"band\" data-label=\"" << c.label << "\" fill=\"" << color
        << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
    for (const auto& p : c.points) {
      out << fmt(l.x(static_cast<double>(p.step))) << ',' << fmt(l.y(p.mean + p.stddev)) << ' ';
    }
    for (auto it = c.points.rbegin(); it != c.points.rend(); ++it) {
      out << fmt(l.x(static_cast<double>(it->step))) << ',' << fmt(l.y(it->mean - it->stddev)) << ' ';
    }
    out << "\"/>\n";

    out << "  <polyline class=\"mean\" data-label=\"" << c.label << "\" fill=\"none\" stroke=\""
        << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : c.points) {
      out << fmt(l.x(static_cast<double>(p.step))) << ',' << fmt(l.y(p.mean)) << ' ';
    }
    out << "\"/>\n";

    out << "  <text x=\"" << (x0 + 10) << "\" y=\"" << (y1 + 15 + 15 * static_cast<double>(ci))
        << "\" font-size=\"12\" fill=\"" << color << "\">" << c.label << "</text>\n";
  }
  out << "</svg>\n";
}

// ---- comparison ------------------------------------------------------------

std::vector<AgentSummary> summarize_final_window(const std::vector<fs::path>& run_dirs) {
  if (run_dirs.size() < 2) throw ConfigError("compare: need at least two run directories");
  std::vector<AgentSummary> out;
  long budget = -1;
  for (const auto& dir : run_dirs) {
    const RunData run = load_run(dir);
    if (budget < 0) budget = run.total_steps;
    if (run.total_steps != budget) {
      throw ConfigError("compare: unequal step budgets (" + std::to_string(run.total_steps) +
                        " vs " + std::to_string(budget) + ") in " + dir.string());
    }
    AgentSummary s;
    s.label = run.label;
    s.total_steps = run.total_steps;
    const long window_start = run.total_steps - run.total_steps / 10;
    for (const auto& series : run.seeds) {
      double sum = 0.0;
      long n = 0;
      for (std::size_t i = 0; i < series.steps.size(); ++i) {
        if (series.steps[i] >= window_start) {
          sum += series.returns[i];
          ++n;
        }
      }
      if (n == 0) {  // fall back to the last point
        sum = series.returns.back();
        n = 1;
      }
      s.per_seed_final.push_back(sum / static_cast<double>(n));
    }
    double m = 0.0;
    for (const double v : s.per_seed_final) m += v;
    m /= static_cast<double>(s.per_seed_final.size());
    double var = 0.0;
    for (const double v : s.per_seed_final) var += (v - m) * (v - m);
    s.final_mean = m;
    s.seed_std = std::sqrt(var / static_cast<double>(s.per_seed_final.size()));
    out.push_back(std::move(s));
  }
  return out;
}

std::string compare_table_csv(const std::vector<AgentSummary>& summaries) {
  std::ostringstream out;
  out << "agent_a,agent_b,mean_a,std_a,mean_b,std_b,a_dominates_b\n";
  for (const auto& a : summaries) {
    for (const auto& b : summaries) {
      const bool dominates = (&a != &b) && a.final_mean > b.final_mean;
      out << a.label << ',' << b.label << ',' << fmt(a.final_mean) << ',' << fmt(a.seed_std) << ','
          << fmt(b.final_mean) << ',' << fmt(b.seed_std) << ',' << (dominates ? "true" : "false")
          << '\n';
    }
  }
  return out.str();
}

// ---- checkpoint evaluation ---------------------------------------------------

double evaluate_checkpoint(const fs::path& checkpoint_file, int episodes) {
  std::ifstream in(checkpoint_file);
  if (!in) throw ConfigError("cannot read checkpoint: " + checkpoint_file.string());
  json j;
  in >> j;
  if (j.value("format", "") != "intact-checkpoint-v1") {
    throw ConfigError("checkpoint: unknown format");
  }
  const TrainConfig cfg = parse_train_config(j.at("config"));
  const auto seed = j.value("seed", 0ull);
  RngStream agent_rng = RngStream(seed).child("init");
  RngStream eval_rng = RngStream(seed).child("cli_eval");
  RngStream scratch(0);

  const std::string kind = j.at("agent").value("kind", "");
  if (kind == "sac_integer" || kind == "ppo_integer" || kind == "random") {
    auto env = make_integer_env(cfg.env);
    if (kind == "sac_integer") {
      SacConfig sc;
      sc.hidden = cfg.hidden;
      sc.alpha = cfg.alpha;
      sc.stgs_tau = cfg.stgs_tau;
      SacAgent agent(env->obs_dim(), env->action_spec(), sc, agent_rng);
      agent.restore(j.at("agent"));
      return eval_episodes(*env, episodes, eval_rng, [&](const std::vector<double>& o, int) {
        return agent.act(o, false, scratch).indices;
      });
    }
    if (kind == "ppo_integer") {
      PpoConfig pc;
      pc.hidden = cfg.hidden;
      PpoAgent agent(env->obs_dim(), env->action_spec(), pc, agent_rng);
      agent.restore(j.at("agent"));
      return eval_episodes(*env, episodes, eval_rng, [&](const std::vector<double>& o, int) {
        return agent.act_deterministic(o);
      });
    }
    RngStream act_rng = eval_rng.child("actions");
    return eval_episodes(*env, episodes, eval_rng, [&](const std::vector<double>&, int) {
      return uniform_integer_action(env->action_spec(), act_rng);
    });
  }
  if (kind == "sac_continuous") {
    auto env = make_continuous_env(cfg.env);
    SacConfig sc;
    sc.hidden = cfg.hidden;
    sc.alpha = cfg.alpha;
    SacAgent agent(env->obs_dim(), env->action_dim(), sc, agent_rng);
    agent.restore(j.at("agent"));
    return eval_episodes(*env, episodes, eval_rng, [&](const std::vector<double>& o, int) {
      return agent.act(o, false, scratch).action;
    });
  }
  throw ConfigError("checkpoint: unknown agent kind '" + kind + "'");
}

}  // namespace intact::harness
