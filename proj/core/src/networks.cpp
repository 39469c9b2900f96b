#include "intact/networks.hpp"

namespace intact {

namespace {

std::vector<int> trunk_sizes(int state_dim, const std::vector<int>& hidden) {
  std::vector<int> sizes;
  sizes.push_back(state_dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  return sizes;
}

}  // namespace

IntegerActor::IntegerActor(int state_dim, const std::vector<int>& hidden, IntegerActionSpec spec_,
                           RngStream& rng)
    : spec(std::move(spec_)) {
  spec.validate();
  if (hidden.empty()) throw ConfigError("IntegerActor: need at least one hidden layer");
  trunk = Mlp(trunk_sizes(state_dim, hidden), Activation::kRelu, Activation::kRelu, rng);
  heads.reserve(spec.bins.size());
  for (const int n : spec.bins) heads.emplace_back(hidden.back(), n, rng);
}

std::vector<Var> IntegerActor::forward(const Var& states) const {
  const Var feat = trunk.forward(states);
  std::vector<Var> out;
  out.reserve(heads.size());
  for (const auto& h : heads) out.push_back(h.forward(feat));
  return out;
}

std::vector<Var> IntegerActor::params() const {
  std::vector<Var> out = trunk.params();
  for (const auto& h : heads) {
    out.push_back(h.weight);
    out.push_back(h.bias);
  }
  return out;
}

NamedParams IntegerActor::named_params(const std::string& prefix) const {
  NamedParams out = mlp_named_params(trunk, prefix + ".trunk");
  for (std::size_t k = 0; k < heads.size(); ++k) {
    out.emplace_back(prefix + ".head" + std::to_string(k) + ".w", heads[k].weight);
    out.emplace_back(prefix + ".head" + std::to_string(k) + ".b", heads[k].bias);
  }
  return out;
}

ContinuousActor::ContinuousActor(int state_dim, const std::vector<int>& hidden, int action_dim_,
                                 RngStream& rng)
    : action_dim(action_dim_) {
  if (hidden.empty()) throw ConfigError("ContinuousActor: need at least one hidden layer");
  trunk = Mlp(trunk_sizes(state_dim, hidden), Activation::kRelu, Activation::kRelu, rng);
  mean_head = Linear(hidden.back(), action_dim, rng);
  log_std_head = Linear(hidden.back(), action_dim, rng);
}

ContinuousActor::Heads ContinuousActor::forward(const Var& states) const {
  const Var feat = trunk.forward(states);
  return {mean_head.forward(feat), log_std_head.forward(feat)};
}

std::vector<Var> ContinuousActor::params() const {
  std::vector<Var> out = trunk.params();
  out.push_back(mean_head.weight);
  out.push_back(mean_head.bias);
  out.push_back(log_std_head.weight);
  out.push_back(log_std_head.bias);
  return out;
}

NamedParams ContinuousActor::named_params(const std::string& prefix) const {
  NamedParams out = mlp_named_params(trunk, prefix + ".trunk");
  out.emplace_back(prefix + ".mean.w", mean_head.weight);
  out.emplace_back(prefix + ".mean.b", mean_head.bias);
  out.emplace_back(prefix + ".log_std.w", log_std_head.weight);
  out.emplace_back(prefix + ".log_std.b", log_std_head.bias);
  return out;
}

QCritic::QCritic(int state_dim, int action_dim, const std::vector<int>& hidden, RngStream& rng) {
  std::vector<int> sizes = trunk_sizes(state_dim + action_dim, hidden);
  sizes.push_back(1);
  net = Mlp(sizes, Activation::kRelu, Activation::kIdentity, rng);
}

Var QCritic::forward(const Var& states, const Var& actions) const {
  if (states.rows() != actions.rows()) {
    throw ShapeError("QCritic: states " + shape_str(states.payload()) + " vs actions " +
                     shape_str(actions.payload()));
  }
  return net.forward(concat_cols(states, actions));
}

std::vector<Var> QCritic::params() const { return net.params(); }

NamedParams QCritic::named_params(const std::string& prefix) const {
  return mlp_named_params(net, prefix);
}

NamedParams mlp_named_params(const Mlp& m, const std::string& prefix) {
  NamedParams out;
  const auto& layers = m.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    out.emplace_back(prefix + ".l" + std::to_string(i) + ".w", layers[i].weight);
    out.emplace_back(prefix + ".l" + std::to_string(i) + ".b", layers[i].bias);
  }
  return out;
}

nlohmann::json params_to_json(const NamedParams& params) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [name, v] : params) {
    nlohmann::json entry;
    entry["name"] = name;
    entry["rows"] = v.rows();
    entry["cols"] = v.cols();
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(v.rows() * v.cols()));
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      for (Eigen::Index j = 0; j < v.cols(); ++j) data.push_back(v.payload()(i, j));
    }
    entry["data"] = std::move(data);
    arr.push_back(std::move(entry));
  }
  return arr;
}

void params_from_json(const nlohmann::json& j, NamedParams& params) {
  if (!j.is_array() || j.size() != params.size()) {
    throw ConfigError("checkpoint: parameter count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& entry = j[i];
    auto& [name, v] = params[i];
    if (entry.at("name").get<std::string>() != name) {
      throw ConfigError("checkpoint: expected parameter '" + name + "', found '" +
                        entry.at("name").get<std::string>() + "'");
    }
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    if (rows != v.rows() || cols != v.cols()) {
      throw ConfigError("checkpoint: shape mismatch for '" + name + "': file " +
                        shape_str(rows, cols) + ", model " + shape_str(v.payload()));
    }
    const auto data = entry.at("data").get<std::vector<double>>();
    if (data.size() != static_cast<std::size_t>(rows * cols)) {
      throw ConfigError("checkpoint: data length mismatch for '" + name + "'");
    }
    Mat& m = v.payload();
    std::size_t idx = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[idx++];
    }
  }
}

}  // namespace intact
