#include "intact/mlp.hpp"

#include <cmath>

namespace intact {

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  if (s == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation: " + s);
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kIdentity: return "identity";
  }
  return "identity";
}

Var apply_activation(const Var& x, Activation a) {
  switch (a) {
    case Activation::kTanh: return tanh(x);
    case Activation::kRelu: return relu(x);
    case Activation::kIdentity: return x;
  }
  return x;
}

Linear::Linear(int in, int out, RngStream& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  Mat w(in, out);
  for (int i = 0; i < in; ++i) {
    for (int j = 0; j < out; ++j) w(i, j) = rng.uniform(-limit, limit);
  }
  weight = Var::leaf(std::move(w), true);
  bias = Var::leaf(Mat::Zero(1, out), true);
}

Mlp::Mlp(const std::vector<int>& sizes, Activation hidden, Activation output, RngStream& rng) {
  if (sizes.size() < 2) throw ConfigError("Mlp: need at least input and output sizes");
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    layers_.emplace_back(sizes[i], sizes[i + 1], rng);
    acts_.push_back(i + 2 == sizes.size() ? output : hidden);
  }
}

Var Mlp::forward(const Var& x) const {
  Var h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = apply_activation(layers_[i].forward(h), acts_[i]);
  }
  return h;
}

std::vector<Var> Mlp::params() const {
  std::vector<Var> out;
  out.reserve(layers_.size() * 2);
  for (const auto& l : layers_) {
    out.push_back(l.weight);
    out.push_back(l.bias);
  }
  return out;
}

}  // namespace intact
