#include "intact/integer_action.hpp"

namespace intact {

IntegerActionSpec::IntegerActionSpec(std::vector<int> bins_, bool embed_all)
    : bins(std::move(bins_)), embed(bins.size(), embed_all) {
  validate();
}

IntegerActionSpec::IntegerActionSpec(std::vector<int> bins_, std::vector<bool> embed_)
    : bins(std::move(bins_)), embed(std::move(embed_)) {
  validate();
}

int IntegerActionSpec::logit_width() const {
  int w = 0;
  for (const int n : bins) w += n;
  return w;
}

void IntegerActionSpec::validate() const {
  if (bins.empty()) throw ConfigError("IntegerActionSpec: need K >= 1 dimensions");
  if (embed.size() != bins.size()) {
    throw ConfigError("IntegerActionSpec: embed flags do not match dimensions");
  }
  for (const int n : bins) {
    if (n < 2) throw ConfigError("IntegerActionSpec: every dimension needs N >= 2 bins");
  }
}

IntegerActionSpec IntegerActionSpec::all_embedded() const {
  IntegerActionSpec s = *this;
  s.embed.assign(s.bins.size(), true);
  return s;
}

double embed_index(int a, int n_bins) {
  if (n_bins < 2) throw ConfigError("embed: N must be >= 2");
  return static_cast<double>(a) * 2.0 / static_cast<double>(n_bins - 1) - 1.0;
}

Var embed(const Var& index_value, int n_bins) {
  if (n_bins < 2) throw ConfigError("embed: N must be >= 2");
  return add_scalar(scale(index_value, 2.0 / static_cast<double>(n_bins - 1)), -1.0);
}

IntegerSample integer_sample(const Var& logits, double tau, RngStream& rng) {
  const StgsSample s = stgs(logits, tau, rng);
  Mat ramp(logits.cols(), 1);
  for (Eigen::Index j = 0; j < logits.cols(); ++j) ramp(j, 0) = static_cast<double>(j);
  IntegerSample out;
  out.value = matmul(s.forward, Var::constant(std::move(ramp)));
  out.index = s.index;
  return out;
}

AssembledAction assemble_action(const std::vector<Var>& heads, const IntegerActionSpec& spec,
                                double tau, RngStream& rng) {
  spec.validate();
  if (static_cast<int>(heads.size()) != spec.dims()) {
    throw ShapeError("assemble_action: " + std::to_string(heads.size()) + " heads for K=" +
                     std::to_string(spec.dims()));
  }
  const Eigen::Index batch = heads.front().rows();
  for (int k = 0; k < spec.dims(); ++k) {
    if (heads[static_cast<std::size_t>(k)].cols() != spec.bins[static_cast<std::size_t>(k)]) {
      throw ShapeError("assemble_action: head " + std::to_string(k) + " width " +
                       std::to_string(heads[static_cast<std::size_t>(k)].cols()) +
                       " != N_k " + std::to_string(spec.bins[static_cast<std::size_t>(k)]));
    }
    if (heads[static_cast<std::size_t>(k)].rows() != batch) {
      throw ShapeError("assemble_action: inconsistent batch sizes across heads");
    }
  }

  AssembledAction out;
  out.indices.assign(static_cast<std::size_t>(batch), std::vector<int>(spec.bins.size()));
  Var action;
  Var log_prob;
  for (std::size_t k = 0; k < heads.size(); ++k) {
    const IntegerSample s = integer_sample(heads[k], tau, rng);
    const Var component = spec.embed[k] ? embed(s.value, spec.bins[k]) : s.value;
    const Var lp = categorical_log_prob(heads[k], s.index);
    for (Eigen::Index b = 0; b < batch; ++b) {
      out.indices[static_cast<std::size_t>(b)][k] = s.index[static_cast<std::size_t>(b)];
    }
    action = k == 0 ? component : concat_cols(action, component);
    log_prob = k == 0 ? lp : add(log_prob, lp);
  }
  out.action = std::move(action);
  out.log_prob = std::move(log_prob);
  return out;
}

}  // namespace intact
