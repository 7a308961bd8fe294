#include "cpnc/matrix.hpp"

#include <cmath>

#include "cpnc/errors.hpp"
#include "cpnc/parallel.hpp"

namespace cpnc {

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ArgumentError("matmul: dimension mismatch");
  Matrix out(a.rows(), b.cols());
  parallel_for(a.rows(), [&](int64_t r0, int64_t r1) {
    for (int64_t i = r0; i < r1; ++i) {
      double* oi = out.data() + i * out.cols();
      const double* ai = a.data() + i * a.cols();
      for (int64_t k = 0; k < a.cols(); ++k) {
        double aik = ai[k];
        if (aik == 0.0) continue;
        const double* bk = b.data() + k * b.cols();
        for (int64_t j = 0; j < b.cols(); ++j) oi[j] += aik * bk[j];
      }
    }
  });
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ArgumentError("matmul_tn: dimension mismatch");
  Matrix out(a.cols(), b.cols());
  // out(k, j) = sum_i a(i, k) * b(i, j); parallel over k keeps writes disjoint.
  parallel_for(a.cols(), [&](int64_t k0, int64_t k1) {
    for (int64_t k = k0; k < k1; ++k) {
      double* ok = out.data() + k * out.cols();
      for (int64_t i = 0; i < a.rows(); ++i) {
        double aik = a(i, k);
        if (aik == 0.0) continue;
        const double* bi = b.data() + i * b.cols();
        for (int64_t j = 0; j < b.cols(); ++j) ok[j] += aik * bi[j];
      }
    }
  });
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ArgumentError("matmul_nt: dimension mismatch");
  Matrix out(a.rows(), b.rows());
  parallel_for(a.rows(), [&](int64_t r0, int64_t r1) {
    for (int64_t i = r0; i < r1; ++i) {
      for (int64_t j = 0; j < b.rows(); ++j) {
        out(i, j) = dot(a.row(i), b.row(j));
      }
    }
  });
  return out;
}

void axpy(double alpha, const Matrix& x, Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw ArgumentError("axpy: shape mismatch");
  }
  double* yd = y.data();
  const double* xd = x.data();
  for (int64_t i = 0; i < x.size(); ++i) yd[i] += alpha * xd[i];
}

double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double norm2(std::span<const double> u) { return std::sqrt(dot(u, u)); }

}  // namespace cpnc
