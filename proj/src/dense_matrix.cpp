#include "fpc/dense_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include "fpc/kernels.hpp"

namespace fpc {

namespace {

void check_dims(int rows, int cols) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("matrix dimensions must be positive, got " +
                                std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

DenseMatrix::DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
  check_dims(rows, cols);
  data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

DenseMatrix::DenseMatrix(int rows, int cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  check_dims(rows, cols);
  if (data_.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("entry count does not match matrix shape");
  }
}

DenseMatrix::DenseMatrix(int rows, int cols, std::initializer_list<double> entries)
    : DenseMatrix(rows, cols, std::vector<double>(entries)) {}

DenseMatrix DenseMatrix::identity(int n) {
  DenseMatrix I(n, n);
  for (int i = 0; i < n; ++i) I(i, i) = 1.0;
  return I;
}

DenseMatrix DenseMatrix::diagonal(const std::vector<double>& d) {
  const int n = static_cast<int>(d.size());
  DenseMatrix D(n, n);
  for (int i = 0; i < n; ++i) D(i, i) = d[static_cast<std::size_t>(i)];
  return D;
}

void DenseMatrix::set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

bool DenseMatrix::is_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_finite(const DenseMatrix& A, const char* what) {
  if (!A.is_finite()) {
    throw std::invalid_argument(std::string(what) + " contains a non-finite entry");
  }
}

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string(what) + " contains a non-finite entry");
    }
  }
}

double frobenius_norm(const DenseMatrix& A) {
  return std::sqrt(kernels::sumsq(A.data(), A.size()));
}

double frobenius_distance(const DenseMatrix& A, const DenseMatrix& B) {
  if (!A.same_shape(B)) throw std::invalid_argument("shape mismatch in frobenius_distance");
  return std::sqrt(kernels::sumsq_diff(A.data(), B.data(), A.size()));
}

DenseMatrix transpose(const DenseMatrix& A) {
  DenseMatrix T(A.cols(), A.rows());
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) T(j, i) = A(i, j);
  }
  return T;
}

DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.cols() != B.rows()) throw std::invalid_argument("shape mismatch in matmul");
  DenseMatrix C(A.rows(), B.cols());
  const std::size_t n = static_cast<std::size_t>(B.cols());
  for (int i = 0; i < A.rows(); ++i) {
    double* ci = C.row(i);
    for (int k = 0; k < A.cols(); ++k) {
      kernels::axpy(A(i, k), B.row(k), ci, n);
    }
  }
  return C;
}

DenseMatrix matmul_nt(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.cols() != B.cols()) throw std::invalid_argument("shape mismatch in matmul_nt");
  DenseMatrix C(A.rows(), B.rows());
  const std::size_t k = static_cast<std::size_t>(A.cols());
  for (int i = 0; i < A.rows(); ++i) {
    const double* ai = A.row(i);
    double* ci = C.row(i);
    for (int j = 0; j < B.rows(); ++j) {
      ci[j] = kernels::dot(ai, B.row(j), k);
    }
  }
  return C;
}

DenseMatrix matmul_tn(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.rows() != B.rows()) throw std::invalid_argument("shape mismatch in matmul_tn");
  DenseMatrix C(A.cols(), B.cols());
  const std::size_t n = static_cast<std::size_t>(B.cols());
  for (int i = 0; i < A.rows(); ++i) {
    const double* ai = A.row(i);
    const double* bi = B.row(i);
    for (int s = 0; s < A.cols(); ++s) {
      kernels::axpy(ai[s], bi, C.row(s), n);
    }
  }
  return C;
}

void matvec(const DenseMatrix& A, const double* x, double* y) {
  const std::size_t n = static_cast<std::size_t>(A.cols());
  for (int i = 0; i < A.rows(); ++i) y[i] = kernels::dot(A.row(i), x, n);
}

void matvec_t(const DenseMatrix& A, const double* x, double* y) {
  const std::size_t n = static_cast<std::size_t>(A.cols());
  std::memset(y, 0, n * sizeof(double));
  for (int i = 0; i < A.rows(); ++i) kernels::axpy(x[i], A.row(i), y, n);
}

}  // namespace fpc
