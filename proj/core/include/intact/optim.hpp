#pragma once

#include <vector>

#include "intact/autodiff.hpp"

namespace intact {

// Adam over a fixed parameter list. step() applies the update to every
// parameter whose gradient was populated by a backward pass, then clears all
// gradients. Calling step() before any backward reached the parameters is an
// error.
class Adam {
 public:
  explicit Adam(std::vector<Var> params, double lr = 3e-4, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);

  void step();

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  struct Slot {
    Var param;
    Mat m;
    Mat v;
    long t = 0;
  };
  std::vector<Slot> slots_;
  double lr_, beta1_, beta2_, eps_;
};

}  // namespace intact
