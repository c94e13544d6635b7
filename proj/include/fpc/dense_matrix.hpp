#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace fpc {

/// Dense real matrix, row-major. The universal operand of the library.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols);  // zero-filled
  DenseMatrix(int rows, int cols, std::vector<double> entries);
  DenseMatrix(int rows, int cols, std::initializer_list<double> entries);

  static DenseMatrix identity(int n);
  static DenseMatrix diagonal(const std::vector<double>& d);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int i, int j) {
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }
  double operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* row(int i) { return data_.data() + static_cast<std::size_t>(i) * cols_; }
  const double* row(int i) const {
    return data_.data() + static_cast<std::size_t>(i) * cols_;
  }

  void set_zero();
  bool is_finite() const;
  bool same_shape(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Throws std::invalid_argument when A contains NaN/Inf. `what` names the
// operand in the diagnostic.
void require_finite(const DenseMatrix& A, const char* what);
void require_finite(const std::vector<double>& v, const char* what);

double frobenius_norm(const DenseMatrix& A);
double frobenius_distance(const DenseMatrix& A, const DenseMatrix& B);

DenseMatrix transpose(const DenseMatrix& A);

// C = A * B           (m×k)(k×n)
DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B);
// C = A * B^T         (m×k)(n×k)^T ; row-dot formulation
DenseMatrix matmul_nt(const DenseMatrix& A, const DenseMatrix& B);
// C = A^T * B         (m×k)^T (m×n) ; row-axpy accumulation
DenseMatrix matmul_tn(const DenseMatrix& A, const DenseMatrix& B);

// y = A x  and  y = A^T x
void matvec(const DenseMatrix& A, const double* x, double* y);
void matvec_t(const DenseMatrix& A, const double* x, double* y);

}  // namespace fpc
