#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "intact/common.hpp"

namespace intact {

namespace detail {

struct Node {
  Mat payload;
  Mat grad;  // lazily sized; same shape as payload once touched
  bool requires_grad = false;
  bool has_grad = false;
  bool consumed = false;  // non-leaf visited by a backward pass
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(const Mat&)> backprop;  // accumulates out-grad into parents
};

using NodePtr = std::shared_ptr<Node>;

struct Access;

}  // namespace detail

// Handle to a node in a define-by-run reverse-mode graph. Copies share the
// node. Graphs are rebuilt per forward pass; backward() runs once per graph
// and throws on reuse (leaves excepted, so parameters participate in many
// graphs and accumulate grads until the optimizer clears them).
class Var {
 public:
  Var() = default;

  static Var leaf(Mat payload, bool requires_grad = false);
  static Var constant(Mat payload) { return leaf(std::move(payload), false); }
  static Var scalar(double v, bool requires_grad = false);

  bool valid() const { return node_ != nullptr; }

  const Mat& payload() const { return node_->payload; }
  Mat& payload() { return node_->payload; }

  Eigen::Index rows() const { return node_->payload.rows(); }
  Eigen::Index cols() const { return node_->payload.cols(); }

  // Value of a 1x1 node.
  double item() const;

  // Accumulated gradient; zeros if backward has not reached this node.
  Mat grad() const;
  bool has_grad() const { return node_->has_grad; }
  void zero_grad();

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool rg) { node_->requires_grad = rg; }

  // Reverse pass from a scalar root. Throws ShapeError unless 1x1 and
  // std::logic_error if this graph was already consumed.
  void backward() const;

  // Same payload, no parents, no gradient flow.
  Var detach() const;

  bool is_leaf() const { return node_->parents.empty(); }

 private:
  explicit Var(detail::NodePtr n) : node_(std::move(n)) {}
  detail::NodePtr node_;
  friend struct detail::Access;
};

namespace detail {
struct Access {
  static const NodePtr& node(const Var& v) { return v.node_; }
  static Var wrap(NodePtr n) { return Var(std::move(n)); }
};
}  // namespace detail

// ---- op family -------------------------------------------------------------

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);                 // same shape
Var add_rowvec(const Var& m, const Var& row);        // [r x c] + [1 x c]
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);                 // elementwise
Var neg(const Var& a);
Var scale(const Var& a, double c);
Var add_scalar(const Var& a, double c);
Var exp(const Var& a);
Var log(const Var& a);                               // DomainError on non-positive entries
Var tanh(const Var& a);
Var relu(const Var& a);
Var softplus(const Var& a);
Var clamp(const Var& a, double lo, double hi);       // grad passes inside [lo, hi]
Var square(const Var& a);
Var sum(const Var& a);                               // full reduce -> [1 x 1]
Var mean(const Var& a);
Var sum_rows(const Var& a);                          // [r x c] -> [r x 1]
Var min_elementwise(const Var& a, const Var& b);     // ties route grad to a
Var inner_product(const Var& a, const Var& b);       // same shape -> [1 x 1]
Var slice_cols(const Var& a, Eigen::Index first, Eigen::Index count);
Var gather_cols(const Var& a, const std::vector<int>& col_per_row);  // -> [r x 1]
Var concat_cols(const Var& a, const Var& b);

// Row-wise softmax / log-softmax, max-stabilized. DomainError on NaN/inf
// input. n >= 2 columns required.
Var softmax_rows(const Var& a);
Var log_softmax_rows(const Var& a);

// Forward payload is `hard` exactly; gradient passes to `relaxed` with an
// identity Jacobian. This is hard - const(relaxed) + relaxed without the
// floating-point round trip, so the payload stays bit-exact.
Var straight_through(const Mat& hard, const Var& relaxed);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator-(const Var& a) { return neg(a); }
inline Var operator*(double c, const Var& a) { return scale(a, c); }
inline Var operator*(const Var& a, double c) { return scale(a, c); }
inline Var operator+(const Var& a, double c) { return add_scalar(a, c); }
inline Var operator+(double c, const Var& a) { return add_scalar(a, c); }
inline Var operator-(const Var& a, double c) { return add_scalar(a, -c); }
inline Var operator-(double c, const Var& a) { return add_scalar(neg(a), c); }

// Sets requires_grad=false on construction and restores previous flags on
// destruction. Parameters frozen this way receive exactly zero gradient.
class FreezeParams {
 public:
  explicit FreezeParams(std::vector<Var> params);
  ~FreezeParams();
  FreezeParams(const FreezeParams&) = delete;
  FreezeParams& operator=(const FreezeParams&) = delete;

 private:
  std::vector<Var> params_;
  std::vector<bool> saved_;
};

}  // namespace intact
