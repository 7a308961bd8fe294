#include "cpnc/optim.hpp"

#include <cmath>

#include "cpnc/errors.hpp"

namespace cpnc {

void Adam::add_param(Matrix* param, double lr) {
  params_.push_back(param);
  lrs_.push_back(lr);
  m_.emplace_back(param->rows(), param->cols());
  v_.emplace_back(param->rows(), param->cols());
}

void Adam::step(const std::vector<const Matrix*>& grads) {
  if (grads.size() != params_.size()) throw ArgumentError("Adam: gradient list mismatch");
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t p = 0; p < params_.size(); ++p) {
    Matrix& w = *params_[p];
    const Matrix& g = *grads[p];
    if (g.rows() != w.rows() || g.cols() != w.cols()) {
      throw ArgumentError("Adam: gradient shape mismatch");
    }
    Matrix& m = m_[p];
    Matrix& v = v_[p];
    double lr = lrs_[p];
    for (int64_t i = 0; i < w.size(); ++i) {
      double gi = g.data()[i];
      m.data()[i] = beta1_ * m.data()[i] + (1.0 - beta1_) * gi;
      v.data()[i] = beta2_ * v.data()[i] + (1.0 - beta2_) * gi * gi;
      double mhat = m.data()[i] / bc1;
      double vhat = v.data()[i] / bc2;
      w.data()[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace cpnc
