#include "intact/sac.hpp"

#include <cmath>
#include <unordered_set>

namespace intact {

ReplayBuffer::ReplayBuffer(std::size_t capacity) {
  if (capacity == 0) throw ConfigError("ReplayBuffer: capacity must be positive");
  ring_.reserve(capacity);
  ring_.resize(capacity);
}

void ReplayBuffer::push(Transition t) {
  ring_[cursor_] = std::move(t);
  cursor_ = (cursor_ + 1) % ring_.size();
  if (cursor_ == 0) full_ = true;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, RngStream& rng) const {
  const std::size_t n = size();
  if (batch == 0 || batch > n) {
    throw std::invalid_argument("ReplayBuffer::sample: batch " + std::to_string(batch) +
                                " from " + std::to_string(n) + " records");
  }
  // Floyd's sampling: `batch` distinct indices in O(batch).
  std::unordered_set<std::size_t> chosen;
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (std::size_t i = n - batch; i < n; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i) + 1));
    const std::size_t pick = chosen.insert(j).second ? j : i;
    if (pick != j) chosen.insert(pick);
    out.push_back(&ring_[pick]);
  }
  return out;
}

SacAgent::SacAgent(int state_dim, IntegerActionSpec spec, SacConfig cfg, RngStream& rng)
    : state_dim_(state_dim), action_dim_(spec.dims()), cfg_(std::move(cfg)) {
  critic_spec_ = spec.all_embedded();
  RngStream init = rng.child("sac_init");
  integer_actor_.emplace(state_dim, cfg_.hidden, std::move(spec), init);
  init_critics(init);
}

SacAgent::SacAgent(int state_dim, int action_dim, SacConfig cfg, RngStream& rng)
    : state_dim_(state_dim), action_dim_(action_dim), cfg_(std::move(cfg)) {
  RngStream init = rng.child("sac_init");
  continuous_actor_.emplace(state_dim, cfg_.hidden, action_dim, init);
  init_critics(init);
}

void SacAgent::init_critics(RngStream& init) {
  q1_ = QCritic(state_dim_, action_dim_, cfg_.hidden, init);
  q2_ = QCritic(state_dim_, action_dim_, cfg_.hidden, init);
  RngStream scratch = init.child("targets");
  target_q1_ = QCritic(state_dim_, action_dim_, cfg_.hidden, scratch);
  target_q2_ = QCritic(state_dim_, action_dim_, cfg_.hidden, scratch);
  // Targets start as exact copies and never receive gradients.
  const auto src1 = q1_.params(), src2 = q2_.params();
  auto dst1 = target_q1_.params(), dst2 = target_q2_.params();
  for (std::size_t i = 0; i < src1.size(); ++i) dst1[i].payload() = src1[i].payload();
  for (std::size_t i = 0; i < src2.size(); ++i) dst2[i].payload() = src2[i].payload();
  for (auto& p : dst1) p.set_requires_grad(false);
  for (auto& p : dst2) p.set_requires_grad(false);

  const std::vector<Var> actor_params =
      integer_mode() ? integer_actor_->params() : continuous_actor_->params();
  opt_actor_.emplace(actor_params, cfg_.lr);
  opt_q1_.emplace(q1_.params(), cfg_.lr);
  opt_q2_.emplace(q2_.params(), cfg_.lr);
}

Mat SacAgent::batch_states(const std::vector<const Transition*>& batch, bool next) {
  const auto rows = static_cast<Eigen::Index>(batch.size());
  const auto& first = next ? batch.front()->next_state : batch.front()->state;
  Mat m(rows, static_cast<Eigen::Index>(first.size()));
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& s = next ? batch[static_cast<std::size_t>(i)]->next_state
                         : batch[static_cast<std::size_t>(i)]->state;
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = s[static_cast<std::size_t>(j)];
  }
  return m;
}

SacAgent::PolicySample SacAgent::sample_policy(const Var& states, RngStream& rng) const {
  PolicySample out;
  if (integer_mode()) {
    const std::vector<Var> heads = integer_actor_->forward(states);
    AssembledAction a = assemble_action(heads, critic_spec_, cfg_.stgs_tau, rng);
    out.action = std::move(a.action);
    out.log_prob = std::move(a.log_prob);
    if (cfg_.exact_entropy) {
      Var ent;
      for (std::size_t k = 0; k < heads.size(); ++k) {
        const Var h = softmax_entropy_rows(heads[k]);
        ent = k == 0 ? h : add(ent, h);
      }
      out.entropy = std::move(ent);
    }
  } else {
    const ContinuousActor::Heads h = continuous_actor_->forward(states);
    SquashedSample s = squashed_gaussian(h.mean, h.log_std, rng);
    out.action = std::move(s.action);
    out.log_prob = std::move(s.log_prob);
  }
  return out;
}

SacAgent::ActionSample SacAgent::act(std::span<const double> obs, bool stochastic,
                                     RngStream& rng) const {
  if (static_cast<int>(obs.size()) != state_dim_) {
    throw ShapeError("SacAgent::act: obs size " + std::to_string(obs.size()) + ", expected " +
                     std::to_string(state_dim_));
  }
  Mat s(1, state_dim_);
  for (int j = 0; j < state_dim_; ++j) s(0, j) = obs[static_cast<std::size_t>(j)];
  const Var state = Var::constant(std::move(s));

  ActionSample out;
  if (integer_mode()) {
    const std::vector<Var> heads = integer_actor_->forward(state);
    const auto& spec = integer_actor_->spec;
    out.indices.resize(heads.size());
    out.action.resize(heads.size());
    for (std::size_t k = 0; k < heads.size(); ++k) {
      const Eigen::RowVectorXd logits = heads[k].payload().row(0);
      int idx;
      if (stochastic) {
        idx = gumbel_max(std::span<const double>(logits.data(), static_cast<std::size_t>(logits.size())), rng);
      } else {
        idx = argmax_row(logits);
      }
      out.indices[k] = idx;
      out.action[k] = embed_index(idx, spec.bins[k]);
    }
  } else {
    const ContinuousActor::Heads h = continuous_actor_->forward(state);
    out.action.resize(static_cast<std::size_t>(action_dim_));
    if (stochastic) {
      for (int k = 0; k < action_dim_; ++k) {
        const double ls = std::clamp(h.log_std.payload()(0, k), -20.0, 2.0);
        const double u = h.mean.payload()(0, k) + std::exp(ls) * rng.normal();
        out.action[static_cast<std::size_t>(k)] = std::tanh(u);
      }
    } else {
      for (int k = 0; k < action_dim_; ++k) {
        out.action[static_cast<std::size_t>(k)] = std::tanh(h.mean.payload()(0, k));
      }
    }
  }
  return out;
}

std::pair<double, double> SacAgent::critic_update(const std::vector<const Transition*>& batch,
                                                  RngStream& rng) {
  if (batch.empty()) throw std::invalid_argument("SacAgent::critic_update: empty batch");
  const auto rows = static_cast<Eigen::Index>(batch.size());

  const Var states = Var::constant(batch_states(batch, false));
  const Var next_states = Var::constant(batch_states(batch, true));
  Mat actions(rows, action_dim_);
  Mat rewards(rows, 1);
  Mat not_done(rows, 1);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Transition& t = *batch[static_cast<std::size_t>(i)];
    for (int k = 0; k < action_dim_; ++k) actions(i, k) = t.action[static_cast<std::size_t>(k)];
    rewards(i, 0) = t.reward;
    not_done(i, 0) = t.done ? 0.0 : 1.0;
  }

  // Target y = r + gamma (1 - done) (min_i Q_i^target(s', a') - alpha log pi(a'|s')),
  // gradients blocked: the whole block runs with every network frozen.
  Mat y;
  {
    std::vector<Var> frozen = integer_mode() ? integer_actor_->params() : continuous_actor_->params();
    const FreezeParams guard(std::move(frozen));
    const PolicySample next_a = sample_policy(next_states, rng);
    const Mat q1t = target_q1_.forward(next_states, next_a.action).payload();
    const Mat q2t = target_q2_.forward(next_states, next_a.action).payload();
    Mat soft = q1t.cwiseMin(q2t);
    if (cfg_.exact_entropy && integer_mode()) {
      soft += cfg_.alpha * next_a.entropy.payload();
    } else {
      soft -= cfg_.alpha * next_a.log_prob.payload();
    }
    y = rewards + cfg_.gamma * not_done.cwiseProduct(soft);
  }
  const Var target = Var::constant(std::move(y));
  const Var action_c = Var::constant(std::move(actions));

  const Var pred1 = q1_.forward(states, action_c);
  const Var pred2 = q2_.forward(states, action_c);
  const Var loss1 = mean(square(sub(pred1, target)));
  const Var loss2 = mean(square(sub(pred2, target)));
  const double l1 = loss1.item();
  const double l2 = loss2.item();
  add(loss1, loss2).backward();
  opt_q1_->step();
  opt_q2_->step();
  ++update_count_;
  return {l1, l2};
}

double SacAgent::actor_update(const std::vector<const Transition*>& batch, RngStream& rng) {
  if (batch.empty()) throw std::invalid_argument("SacAgent::actor_update: empty batch");
  const Var states = Var::constant(batch_states(batch, false));

  // Critics provide the objective but take no gradient step here.
  std::vector<Var> critic_params = q1_.params();
  {
    const auto p2 = q2_.params();
    critic_params.insert(critic_params.end(), p2.begin(), p2.end());
  }
  const FreezeParams guard(std::move(critic_params));

  const PolicySample pi = sample_policy(states, rng);
  const Var q = min_elementwise(q1_.forward(states, pi.action), q2_.forward(states, pi.action));
  Var loss;
  if (cfg_.exact_entropy && integer_mode()) {
    loss = mean(sub(scale(pi.entropy, -cfg_.alpha), q));
  } else {
    loss = mean(sub(scale(pi.log_prob, cfg_.alpha), q));
  }
  const double l = loss.item();
  loss.backward();
  opt_actor_->step();
  return l;
}

void SacAgent::polyak_update() {
  const double tau = cfg_.polyak;
  const auto blend = [tau](const std::vector<Var>& src, std::vector<Var>& dst) {
    for (std::size_t i = 0; i < src.size(); ++i) {
      dst[i].payload() = tau * src[i].payload() + (1.0 - tau) * dst[i].payload();
    }
  };
  auto t1 = target_q1_.params();
  auto t2 = target_q2_.params();
  blend(q1_.params(), t1);
  blend(q2_.params(), t2);
}

double SacAgent::entropy_estimate(const std::vector<const Transition*>& batch,
                                  RngStream& rng) const {
  if (batch.empty()) return 0.0;
  const Var states = Var::constant(batch_states(batch, false));
  if (integer_mode()) {
    const std::vector<Var> heads = integer_actor_->forward(states);
    double total = 0.0;
    for (const auto& h : heads) total += softmax_entropy_rows(h).payload().mean();
    return total;
  }
  const ContinuousActor::Heads h = continuous_actor_->forward(states);
  RngStream scratch = rng.child("entropy");
  const SquashedSample s = squashed_gaussian(h.mean, h.log_std, scratch);
  return -s.log_prob.payload().mean();
}

NamedParams SacAgent::named_params() const {
  NamedParams out;
  if (integer_mode()) {
    out = integer_actor_->named_params("actor");
  } else {
    out = continuous_actor_->named_params("actor");
  }
  const auto append = [&out](const NamedParams& p) {
    out.insert(out.end(), p.begin(), p.end());
  };
  append(q1_.named_params("q1"));
  append(q2_.named_params("q2"));
  append(target_q1_.named_params("target_q1"));
  append(target_q2_.named_params("target_q2"));
  return out;
}

nlohmann::json SacAgent::checkpoint() const {
  nlohmann::json j;
  j["kind"] = integer_mode() ? "sac_integer" : "sac_continuous";
  j["alpha"] = cfg_.alpha;
  j["gamma"] = cfg_.gamma;
  j["polyak"] = cfg_.polyak;
  j["step"] = update_count_;
  j["params"] = params_to_json(named_params());
  return j;
}

void SacAgent::restore(const nlohmann::json& j) {
  NamedParams params = named_params();
  params_from_json(j.at("params"), params);
  update_count_ = j.value("step", 0L);
}

}  // namespace intact
