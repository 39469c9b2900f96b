#include "intact/ppo.hpp"

#include <cmath>
#include <numeric>

namespace intact {

void RolloutBatch::clear() {
  states.clear();
  indices.clear();
  log_prob_old.clear();
  rewards.clear();
  values.clear();
  dones.clear();
  advantages.clear();
  returns.clear();
  bootstrap_value = 0.0;
}

void gae_advantages(RolloutBatch& batch, double gamma, double lam) {
  const std::size_t n = batch.size();
  if (batch.values.size() != n || batch.rewards.size() != n || batch.dones.size() != n) {
    throw std::invalid_argument("gae_advantages: ragged rollout columns");
  }
  batch.advantages.assign(n, 0.0);
  batch.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double not_done = 1.0 - batch.dones[t];
    const double next_v = (t + 1 < n) ? batch.values[t + 1] : batch.bootstrap_value;
    const double delta = batch.rewards[t] + gamma * next_v * not_done - batch.values[t];
    running = delta + gamma * lam * not_done * running;
    batch.advantages[t] = running;
    batch.returns[t] = running + batch.values[t];
  }
}

PpoAgent::PpoAgent(int state_dim, IntegerActionSpec spec, PpoConfig cfg, RngStream& rng)
    : cfg_(std::move(cfg)) {
  RngStream init = rng.child("ppo_init");
  actor_ = IntegerActor(state_dim, cfg_.hidden, std::move(spec), init);
  std::vector<int> sizes;
  sizes.push_back(state_dim);
  sizes.insert(sizes.end(), cfg_.hidden.begin(), cfg_.hidden.end());
  sizes.push_back(1);
  value_net_ = Mlp(sizes, Activation::kRelu, Activation::kIdentity, init);

  std::vector<Var> params = actor_.params();
  const auto vp = value_net_.params();
  params.insert(params.end(), vp.begin(), vp.end());
  opt_.emplace(std::move(params), cfg_.lr);
}

PpoAgent::Step PpoAgent::act(std::span<const double> obs, RngStream& rng) const {
  Mat s(1, static_cast<Eigen::Index>(obs.size()));
  for (Eigen::Index j = 0; j < s.cols(); ++j) s(0, j) = obs[static_cast<std::size_t>(j)];
  const Var state = Var::constant(std::move(s));

  const std::vector<Var> heads = actor_.forward(state);
  Step out;
  out.indices.resize(heads.size());
  for (std::size_t k = 0; k < heads.size(); ++k) {
    const Eigen::RowVectorXd logits = heads[k].payload().row(0);
    const int idx = gumbel_max(
        std::span<const double>(logits.data(), static_cast<std::size_t>(logits.size())), rng);
    out.indices[k] = idx;
    out.log_prob +=
        categorical_log_prob(heads[k], std::vector<int>{idx}).payload()(0, 0);
  }
  out.value = value_net_.forward(state).payload()(0, 0);
  return out;
}

std::vector<int> PpoAgent::act_deterministic(std::span<const double> obs) const {
  Mat s(1, static_cast<Eigen::Index>(obs.size()));
  for (Eigen::Index j = 0; j < s.cols(); ++j) s(0, j) = obs[static_cast<std::size_t>(j)];
  const Var state = Var::constant(std::move(s));
  const std::vector<Var> heads = actor_.forward(state);
  std::vector<int> out(heads.size());
  for (std::size_t k = 0; k < heads.size(); ++k) out[k] = argmax_row(heads[k].payload().row(0));
  return out;
}

std::pair<double, double> PpoAgent::update(RolloutBatch& batch, RngStream& rng) {
  const std::size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("PpoAgent::update: empty rollout");
  if (batch.advantages.size() != n) {
    gae_advantages(batch, cfg_.gamma, cfg_.gae_lambda);
  }

  // Per-batch advantage normalization.
  double mean_adv = std::accumulate(batch.advantages.begin(), batch.advantages.end(), 0.0) /
                    static_cast<double>(n);
  double var = 0.0;
  for (const double a : batch.advantages) var += (a - mean_adv) * (a - mean_adv);
  const double std_adv = std::sqrt(var / static_cast<double>(n));
  std::vector<double> adv(n);
  for (std::size_t i = 0; i < n; ++i) {
    adv[i] = (batch.advantages[i] - mean_adv) / (std_adv + 1e-8);
  }

  const int state_dim = static_cast<int>(batch.states.front().size());
  const int dims = spec().dims();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  double pi_loss_sum = 0.0, v_loss_sum = 0.0;
  long batches = 0;
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    // Fisher-Yates shuffle.
    for (std::size_t i = n - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i) + 1));
      std::swap(order[i], order[j]);
    }
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg_.minibatch)) {
      const std::size_t count = std::min(static_cast<std::size_t>(cfg_.minibatch), n - start);
      Mat s(static_cast<Eigen::Index>(count), state_dim);
      Mat adv_m(static_cast<Eigen::Index>(count), 1);
      Mat ret_m(static_cast<Eigen::Index>(count), 1);
      Mat old_lp(static_cast<Eigen::Index>(count), 1);
      std::vector<std::vector<int>> idx_cols(static_cast<std::size_t>(dims),
                                             std::vector<int>(count));
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t src = order[start + i];
        for (int j = 0; j < state_dim; ++j) {
          s(static_cast<Eigen::Index>(i), j) = batch.states[src][static_cast<std::size_t>(j)];
        }
        adv_m(static_cast<Eigen::Index>(i), 0) = adv[src];
        ret_m(static_cast<Eigen::Index>(i), 0) = batch.returns[src];
        old_lp(static_cast<Eigen::Index>(i), 0) = batch.log_prob_old[src];
        for (int k = 0; k < dims; ++k) {
          idx_cols[static_cast<std::size_t>(k)][i] = batch.indices[src][static_cast<std::size_t>(k)];
        }
      }
      const Var states = Var::constant(std::move(s));
      const Var advantages = Var::constant(std::move(adv_m));
      const Var returns = Var::constant(std::move(ret_m));
      const Var old_log_prob = Var::constant(std::move(old_lp));

      const std::vector<Var> heads = actor_.forward(states);
      Var log_prob;
      for (int k = 0; k < dims; ++k) {
        const Var lp = categorical_log_prob(heads[static_cast<std::size_t>(k)],
                                            idx_cols[static_cast<std::size_t>(k)]);
        log_prob = k == 0 ? lp : add(log_prob, lp);
      }
      const Var ratio = exp(sub(log_prob, old_log_prob));
      const Var unclipped = mul(ratio, advantages);
      const Var clipped = mul(clamp(ratio, 1.0 - cfg_.clip_eps, 1.0 + cfg_.clip_eps), advantages);
      const Var loss_pi = neg(mean(min_elementwise(unclipped, clipped)));

      const Var v = value_net_.forward(states);
      const Var loss_v = mean(square(sub(v, returns)));

      pi_loss_sum += loss_pi.item();
      v_loss_sum += loss_v.item();
      ++batches;

      add(loss_pi, scale(loss_v, cfg_.vf_coef)).backward();
      opt_->step();
    }
  }
  return {pi_loss_sum / static_cast<double>(batches), v_loss_sum / static_cast<double>(batches)};
}

NamedParams PpoAgent::named_params() const {
  NamedParams out = actor_.named_params("actor");
  const NamedParams vp = mlp_named_params(value_net_, "value");
  out.insert(out.end(), vp.begin(), vp.end());
  return out;
}

nlohmann::json PpoAgent::checkpoint() const {
  nlohmann::json j;
  j["kind"] = "ppo_integer";
  j["params"] = params_to_json(named_params());
  return j;
}

void PpoAgent::restore(const nlohmann::json& j) {
  NamedParams params = named_params();
  params_from_json(j.at("params"), params);
}

}  // namespace intact
