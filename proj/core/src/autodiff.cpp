#include "intact/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace intact {

using detail::Access;
using detail::Node;
using detail::NodePtr;

namespace {

NodePtr make_leaf(Mat payload, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->payload = std::move(payload);
  n->requires_grad = requires_grad;
  return n;
}

void accumulate(const NodePtr& n, const Mat& g) {
  if (!n->requires_grad) return;
  if (n->grad.size() == 0) n->grad = Mat::Zero(n->payload.rows(), n->payload.cols());
  n->grad += g;
  n->has_grad = true;
}

// Builds an op node. Drops parents and the backprop closure when no parent
// needs gradients, so inference-only graphs carry no backward machinery.
Var make_op(Mat payload, std::vector<NodePtr> parents, std::function<void(const Mat&)> backprop) {
  auto n = std::make_shared<Node>();
  n->payload = std::move(payload);
  n->requires_grad = std::any_of(parents.begin(), parents.end(),
                                 [](const NodePtr& p) { return p->requires_grad; });
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->backprop = std::move(backprop);
  }
  return Access::wrap(std::move(n));
}

void check_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": " + shape_str(a.payload()) + " vs " +
                     shape_str(b.payload()));
  }
}

}  // namespace

Var Var::leaf(Mat payload, bool requires_grad) {
  return Access::wrap(make_leaf(std::move(payload), requires_grad));
}

Var Var::scalar(double v, bool requires_grad) {
  Mat m(1, 1);
  m(0, 0) = v;
  return leaf(std::move(m), requires_grad);
}

double Var::item() const {
  if (rows() != 1 || cols() != 1) {
    throw ShapeError("item: node is " + shape_str(payload()) + ", expected 1x1");
  }
  return node_->payload(0, 0);
}

Mat Var::grad() const {
  if (node_->grad.size() == 0) return Mat::Zero(rows(), cols());
  return node_->grad;
}

void Var::zero_grad() {
  node_->grad.setZero(rows(), cols());
  node_->has_grad = false;
}

Var Var::detach() const {
  return Access::wrap(make_leaf(node_->payload, false));
}

void Var::backward() const {
  if (!node_) throw std::logic_error("backward: empty Var");
  if (rows() != 1 || cols() != 1) {
    throw ShapeError("backward: root is " + shape_str(payload()) + ", expected 1x1 scalar");
  }
  if (node_->consumed) throw std::logic_error("backward: graph already consumed");

  // Reverse post-order DFS over parent edges = topological order with every
  // consumer ahead of its producers.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (!n->parents.empty() && n->consumed) {
      throw std::logic_error("backward: graph already consumed");
    }
  }
  node_->consumed = true;
  for (Node* n : order) {
    if (!n->parents.empty()) n->consumed = true;
  }

  node_->grad = Mat::Ones(1, 1);
  node_->has_grad = true;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop && n->has_grad) n->backprop(n->grad);
  }
}

// ---- ops -------------------------------------------------------------------

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_str(a.payload()) + " x " + shape_str(b.payload()));
  }
  auto na = Access::node(a);
  auto nb = Access::node(b);
  return make_op(na->payload * nb->payload, {na, nb}, [na, nb](const Mat& g) {
    accumulate(na, g * nb->payload.transpose());
    accumulate(nb, na->payload.transpose() * g);
  });
}

Var add(const Var& a, const Var& b) {
  check_same_shape("add", a, b);
  auto na = Access::node(a);
  auto nb = Access::node(b);
  return make_op(na->payload + nb->payload, {na, nb}, [na, nb](const Mat& g) {
    accumulate(na, g);
    accumulate(nb, g);
  });
}

Var add_rowvec(const Var& m, const Var& row) {
  if (row.rows() != 1 || row.cols() != m.cols()) {
    throw ShapeError("add_rowvec: " + shape_str(m.payload()) + " + " + shape_str(row.payload()));
  }
  auto nm = Access::node(m);
  auto nr = Access::node(row);
  Mat out = nm->payload.rowwise() + nr->payload.row(0);
  return make_op(std::move(out), {nm, nr}, [nm, nr](const Mat& g) {
    accumulate(nm, g);
    accumulate(nr, g.colwise().sum());
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape("sub", a, b);
  auto na = Access::node(a);
  auto nb = Access::node(b);
  return make_op(na->payload - nb->payload, {na, nb}, [na, nb](const Mat& g) {
    accumulate(na, g);
    accumulate(nb, -g);
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape("mul", a, b);
  auto na = Access::node(a);
  auto nb = Access::node(b);
  return make_op(na->payload.cwiseProduct(nb->payload), {na, nb}, [na, nb](const Mat& g) {
    accumulate(na, g.cwiseProduct(nb->payload));
    accumulate(nb, g.cwiseProduct(na->payload));
  });
}

Var neg(const Var& a) {
  auto na = Access::node(a);
  return make_op(-na->payload, {na}, [na](const Mat& g) { accumulate(na, -g); });
}

Var scale(const Var& a, double c) {
  auto na = Access::node(a);
  return make_op(c * na->payload, {na}, [na, c](const Mat& g) { accumulate(na, c * g); });
}

Var add_scalar(const Var& a, double c) {
  auto na = Access::node(a);
  return make_op((na->payload.array() + c).matrix(), {na},
                 [na](const Mat& g) { accumulate(na, g); });
}

Var exp(const Var& a) {
  auto na = Access::node(a);
  Mat y = na->payload.array().exp().matrix();
  return make_op(y, {na}, [na, y](const Mat& g) { accumulate(na, g.cwiseProduct(y)); });
}

Var log(const Var& a) {
  auto na = Access::node(a);
  if ((na->payload.array() <= 0.0).any()) {
    throw DomainError("log: non-positive entry");
  }
  return make_op(na->payload.array().log().matrix(), {na}, [na](const Mat& g) {
    accumulate(na, g.cwiseQuotient(na->payload));
  });
}

Var tanh(const Var& a) {
  auto na = Access::node(a);
  Mat y = na->payload.array().tanh().matrix();
  return make_op(y, {na}, [na, y](const Mat& g) {
    accumulate(na, g.cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var relu(const Var& a) {
  auto na = Access::node(a);
  return make_op(na->payload.cwiseMax(0.0), {na}, [na](const Mat& g) {
    accumulate(na, (na->payload.array() > 0.0).select(g, Mat::Zero(g.rows(), g.cols())));
  });
}

Var softplus(const Var& a) {
  auto na = Access::node(a);
  Mat y = (na->payload.array().max(0.0) + (-na->payload.array().abs()).exp().log1p()).matrix();
  return make_op(std::move(y), {na}, [na](const Mat& g) {
    Mat sig = (1.0 / (1.0 + (-na->payload.array()).exp())).matrix();
    accumulate(na, g.cwiseProduct(sig));
  });
}

Var clamp(const Var& a, double lo, double hi) {
  auto na = Access::node(a);
  return make_op(na->payload.cwiseMax(lo).cwiseMin(hi), {na}, [na, lo, hi](const Mat& g) {
    Mat mask = (na->payload.array() >= lo && na->payload.array() <= hi)
                   .select(g, Mat::Zero(g.rows(), g.cols()));
    accumulate(na, mask);
  });
}

Var square(const Var& a) { return mul(a, a); }

Var sum(const Var& a) {
  auto na = Access::node(a);
  Mat y(1, 1);
  y(0, 0) = na->payload.sum();
  return make_op(std::move(y), {na}, [na](const Mat& g) {
    accumulate(na, Mat::Constant(na->payload.rows(), na->payload.cols(), g(0, 0)));
  });
}

Var mean(const Var& a) {
  auto na = Access::node(a);
  const double inv = 1.0 / static_cast<double>(na->payload.size());
  Mat y(1, 1);
  y(0, 0) = na->payload.sum() * inv;
  return make_op(std::move(y), {na}, [na, inv](const Mat& g) {
    accumulate(na, Mat::Constant(na->payload.rows(), na->payload.cols(), g(0, 0) * inv));
  });
}

Var sum_rows(const Var& a) {
  auto na = Access::node(a);
  Mat y = na->payload.rowwise().sum();
  return make_op(std::move(y), {na}, [na](const Mat& g) {
    accumulate(na, g * Mat::Ones(1, na->payload.cols()));
  });
}

Var min_elementwise(const Var& a, const Var& b) {
  check_same_shape("min_elementwise", a, b);
  auto na = Access::node(a);
  auto nb = Access::node(b);
  return make_op(na->payload.cwiseMin(nb->payload), {na, nb}, [na, nb](const Mat& g) {
    Mat zero = Mat::Zero(g.rows(), g.cols());
    Mat take_a = (na->payload.array() <= nb->payload.array()).select(g, zero);
    accumulate(na, take_a);
    accumulate(nb, g - take_a);
  });
}

Var inner_product(const Var& a, const Var& b) {
  check_same_shape("inner_product", a, b);
  auto na = Access::node(a);
  auto nb = Access::node(b);
  Mat y(1, 1);
  y(0, 0) = na->payload.cwiseProduct(nb->payload).sum();
  return make_op(std::move(y), {na, nb}, [na, nb](const Mat& g) {
    accumulate(na, g(0, 0) * nb->payload);
    accumulate(nb, g(0, 0) * na->payload);
  });
}

Var slice_cols(const Var& a, Eigen::Index first, Eigen::Index count) {
  if (first < 0 || count < 1 || first + count > a.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(first) + ", +" + std::to_string(count) +
                     ") out of " + shape_str(a.payload()));
  }
  auto na = Access::node(a);
  Mat y = na->payload.middleCols(first, count);
  return make_op(std::move(y), {na}, [na, first, count](const Mat& g) {
    Mat full = Mat::Zero(na->payload.rows(), na->payload.cols());
    full.middleCols(first, count) = g;
    accumulate(na, full);
  });
}

Var gather_cols(const Var& a, const std::vector<int>& col_per_row) {
  if (static_cast<Eigen::Index>(col_per_row.size()) != a.rows()) {
    throw ShapeError("gather_cols: " + std::to_string(col_per_row.size()) + " indices for " +
                     shape_str(a.payload()));
  }
  for (const int c : col_per_row) {
    if (c < 0 || c >= a.cols()) {
      throw std::out_of_range("gather_cols: index " + std::to_string(c) + " out of " +
                              std::to_string(a.cols()) + " columns");
    }
  }
  auto na = Access::node(a);
  Mat y(a.rows(), 1);
  for (Eigen::Index i = 0; i < a.rows(); ++i) y(i, 0) = na->payload(i, col_per_row[i]);
  return make_op(std::move(y), {na}, [na, col_per_row](const Mat& g) {
    Mat full = Mat::Zero(na->payload.rows(), na->payload.cols());
    for (Eigen::Index i = 0; i < full.rows(); ++i) full(i, col_per_row[i]) = g(i, 0);
    accumulate(na, full);
  });
}

Var concat_cols(const Var& a, const Var& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("concat_cols: " + shape_str(a.payload()) + " | " + shape_str(b.payload()));
  }
  auto na = Access::node(a);
  auto nb = Access::node(b);
  Mat y(a.rows(), a.cols() + b.cols());
  y << na->payload, nb->payload;
  const Eigen::Index ca = a.cols();
  return make_op(std::move(y), {na, nb}, [na, nb, ca](const Mat& g) {
    accumulate(na, g.leftCols(ca));
    accumulate(nb, g.rightCols(g.cols() - ca));
  });
}

namespace {

void check_softmax_input(const char* op, const Var& a) {
  if (a.cols() < 2) {
    throw ShapeError(std::string(op) + ": needs >= 2 columns, got " + shape_str(a.payload()));
  }
  if (!a.payload().allFinite()) {
    throw DomainError(std::string(op) + ": NaN or inf entry");
  }
}

}  // namespace

Var softmax_rows(const Var& a) {
  check_softmax_input("softmax_rows", a);
  auto na = Access::node(a);
  Mat y = na->payload;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    Eigen::RowVectorXd row = y.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp();
    y.row(i) = row / row.sum();
  }
  return make_op(y, {na}, [na, y](const Mat& g) {
    Mat dx(y.rows(), y.cols());
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const double s = g.row(i).dot(y.row(i));
      dx.row(i) = (y.row(i).array() * (g.row(i).array() - s)).matrix();
    }
    accumulate(na, dx);
  });
}

Var log_softmax_rows(const Var& a) {
  check_softmax_input("log_softmax_rows", a);
  auto na = Access::node(a);
  Mat y = na->payload;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    Eigen::RowVectorXd row = y.row(i);
    const double m = row.maxCoeff();
    const double lse = m + std::log((row.array() - m).exp().sum());
    y.row(i) = row.array() - lse;
  }
  return make_op(y, {na}, [na, y](const Mat& g) {
    Mat dx(y.rows(), y.cols());
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const double gs = g.row(i).sum();
      dx.row(i) = g.row(i) - gs * y.row(i).array().exp().matrix();
    }
    accumulate(na, dx);
  });
}

Var straight_through(const Mat& hard, const Var& relaxed) {
  if (hard.rows() != relaxed.rows() || hard.cols() != relaxed.cols()) {
    throw ShapeError("straight_through: " + shape_str(hard) + " vs " +
                     shape_str(relaxed.payload()));
  }
  auto nr = Access::node(relaxed);
  return make_op(hard, {nr}, [nr](const Mat& g) { accumulate(nr, g); });
}

FreezeParams::FreezeParams(std::vector<Var> params) : params_(std::move(params)) {
  saved_.reserve(params_.size());
  for (auto& p : params_) {
    saved_.push_back(p.requires_grad());
    p.set_requires_grad(false);
  }
}

FreezeParams::~FreezeParams() {
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i].set_requires_grad(saved_[i]);
}

}  // namespace intact
