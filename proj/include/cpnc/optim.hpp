#pragma once

#include <vector>

#include "cpnc/matrix.hpp"

namespace cpnc {

// Adam with bias correction; one learning rate per registered tensor.
class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void add_param(Matrix* param, double lr);

  // grads aligned with registration order; every tensor updates each step,
  // so momentum keeps decaying on rows with zero gradient.
  void step(const std::vector<const Matrix*>& grads);

  int64_t steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<Matrix*> params_;
  std::vector<double> lrs_;
  std::vector<Matrix> m_, v_;
};

}  // namespace cpnc
