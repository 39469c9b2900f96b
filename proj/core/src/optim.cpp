#include "intact/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace intact {

Adam::Adam(std::vector<Var> params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  slots_.reserve(params.size());
  for (auto& p : params) {
    Slot s;
    s.m = Mat::Zero(p.rows(), p.cols());
    s.v = Mat::Zero(p.rows(), p.cols());
    s.param = std::move(p);
    slots_.push_back(std::move(s));
  }
}

void Adam::step() {
  bool any = false;
  for (const auto& s : slots_) {
    if (s.param.has_grad()) {
      any = true;
      break;
    }
  }
  if (!any) throw std::logic_error("Adam::step: no gradients; run backward() first");

  for (auto& s : slots_) {
    if (!s.param.has_grad()) continue;
    const Mat g = s.param.grad();
    ++s.t;
    s.m = beta1_ * s.m + (1.0 - beta1_) * g;
    s.v = beta2_ * s.v + (1.0 - beta2_) * g.cwiseProduct(g);
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(s.t));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(s.t));
    const Mat m_hat = s.m / bc1;
    const Mat v_hat = s.v / bc2;
    s.param.payload().array() -= lr_ * m_hat.array() / (v_hat.array().sqrt() + eps_);
    s.param.zero_grad();
  }
}

}  // namespace intact
