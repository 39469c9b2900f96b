#pragma once

#include <string>
#include <vector>

#include "intact/autodiff.hpp"
#include "intact/rng.hpp"

namespace intact {

enum class Activation { kTanh, kRelu, kIdentity };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

// Affine layer y = x W + b. Weights are Xavier-uniform, biases zero.
struct Linear {
  Var weight;  // [in x out]
  Var bias;    // [1 x out]

  Linear() = default;
  Linear(int in, int out, RngStream& rng);

  Var forward(const Var& x) const { return add_rowvec(matmul(x, weight), bias); }
  int in_dim() const { return static_cast<int>(weight.rows()); }
  int out_dim() const { return static_cast<int>(weight.cols()); }
};

// Fully connected stack; `sizes` lists layer widths input-first. The hidden
// activation applies to every layer but the last, which uses `output`.
class Mlp {
 public:
  Mlp() = default;
  Mlp(const std::vector<int>& sizes, Activation hidden, Activation output, RngStream& rng);

  Var forward(const Var& x) const;

  std::vector<Var> params() const;
  const std::vector<Linear>& layers() const { return layers_; }
  int in_dim() const { return layers_.front().in_dim(); }
  int out_dim() const { return layers_.back().out_dim(); }

 private:
  std::vector<Linear> layers_;
  std::vector<Activation> acts_;
};

Var apply_activation(const Var& x, Activation a);

}  // namespace intact
