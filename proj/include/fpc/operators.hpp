#pragma once

#include <vector>

#include "fpc/dense_matrix.hpp"

namespace fpc {

struct Entry {
  int row;
  int col;
};

bool operator==(const Entry& a, const Entry& b);

/// Linear measurement map b = A(X) together with its adjoint. Two concrete
/// forms:
///   - entry mask: A(X)_t = X(omega_t), the classic sampling operator.
///     Measurement order follows the caller's omega order.
///   - explicit affine: A(X) = Op * vec(X) for a dense p×(m·n) matrix Op,
///     with vec() stacking columns (column-major).
class MeasurementMap {
 public:
  // omega entries must be in range and pairwise distinct.
  static MeasurementMap entry_mask(int rows, int cols, std::vector<Entry> omega);
  // op must have rows*cols columns and at least one row.
  static MeasurementMap explicit_affine(int rows, int cols, DenseMatrix op);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int sample_count() const { return p_; }
  bool is_entry_mask() const { return mask_mode_; }
  // Valid only for entry masks.
  const std::vector<Entry>& entries() const;

  std::vector<double> apply(const DenseMatrix& X) const;
  void apply_into(const DenseMatrix& X, double* out) const;

  DenseMatrix adjoint(const std::vector<double>& y) const;
  void adjoint_into(const double* y, DenseMatrix& out) const;

  /// grad = A*(A(X) - b); returns ||A(X) - b||_2^2. `scratch` holds the
  /// residual on exit and is resized as needed.
  double gradient_into(const DenseMatrix& X, const std::vector<double>& b,
                       DenseMatrix& grad, std::vector<double>& scratch) const;
  DenseMatrix gradient(const DenseMatrix& X, const std::vector<double>& b) const;

  /// Upper bound on the squared operator norm ||A||^2 = sigma_1(A)^2, so a
  /// gradient step tau < 2/lipschitz_bound() is a descent step for
  /// 0.5*||A(X)-b||^2. Exactly 1 for entry masks (they are orthogonal
  /// projections); a 1% safety margin over the computed sigma_1^2 otherwise.
  double lipschitz_bound() const { return lipschitz_; }

 private:
  MeasurementMap() = default;

  int rows_ = 0;
  int cols_ = 0;
  int p_ = 0;
  bool mask_mode_ = true;
  std::vector<Entry> entries_;
  std::vector<std::size_t> offsets_;  // flat row-major positions of entries_
  DenseMatrix op_;                    // explicit mode only
  double lipschitz_ = 1.0;
};

}  // namespace fpc
