#include "fpc/operators.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "fpc/kernels.hpp"
#include "fpc/linalg.hpp"

namespace fpc {

bool operator==(const Entry& a, const Entry& b) {
  return a.row == b.row && a.col == b.col;
}

MeasurementMap MeasurementMap::entry_mask(int rows, int cols,
                                          std::vector<Entry> omega) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("entry_mask: matrix dimensions must be positive");
  }
  if (omega.empty()) {
    throw std::invalid_argument("entry_mask: need at least one sampled entry");
  }

  MeasurementMap map;
  map.rows_ = rows;
  map.cols_ = cols;
  map.p_ = static_cast<int>(omega.size());
  map.mask_mode_ = true;
  map.offsets_.reserve(omega.size());
  for (std::size_t t = 0; t < omega.size(); ++t) {
    const Entry e = omega[t];
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols) {
      throw std::invalid_argument("entry_mask: sample " + std::to_string(t) +
                                  " is out of range");
    }
    map.offsets_.push_back(static_cast<std::size_t>(e.row) *
                               static_cast<std::size_t>(cols) +
                           static_cast<std::size_t>(e.col));
  }
  std::vector<std::size_t> sorted = map.offsets_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("entry_mask: duplicate sample position");
  }
  map.entries_ = std::move(omega);
  map.lipschitz_ = 1.0;
  return map;
}

MeasurementMap MeasurementMap::explicit_affine(int rows, int cols,
                                               DenseMatrix op) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("explicit_affine: matrix dimensions must be positive");
  }
  if (op.rows() < 1 ||
      op.cols() != rows * cols) {
    throw std::invalid_argument(
        "explicit_affine: operator must be p x (rows*cols) with p >= 1");
  }
  require_finite(op, "explicit_affine operator");

  MeasurementMap map;
  map.rows_ = rows;
  map.cols_ = cols;
  map.p_ = op.rows();
  map.mask_mode_ = false;
  const double s1 = spectral_norm(op);
  map.lipschitz_ = s1 == 0.0 ? 1.0 : 1.01 * s1 * s1;
  map.op_ = std::move(op);
  return map;
}

const std::vector<Entry>& MeasurementMap::entries() const {
  if (!mask_mode_) {
    throw std::logic_error("entries() is only defined for entry masks");
  }
  return entries_;
}

namespace {

void check_shape(const MeasurementMap& map, const DenseMatrix& X) {
  if (X.rows() != map.rows() || X.cols() != map.cols()) {
    throw std::invalid_argument("measurement map applied to a matrix of the wrong shape");
  }
}

// Column-major stacking of X, the vec() convention of the explicit form.
void vectorize(const DenseMatrix& X, std::vector<double>& v) {
  const int m = X.rows();
  const int n = X.cols();
  v.resize(static_cast<std::size_t>(m) * static_cast<std::size_t>(n));
  std::size_t k = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) v[k++] = X(i, j);
  }
}

void unvectorize(const std::vector<double>& v, DenseMatrix& X) {
  const int m = X.rows();
  const int n = X.cols();
  std::size_t k = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) X(i, j) = v[k++];
  }
}

}  // namespace

void MeasurementMap::apply_into(const DenseMatrix& X, double* out) const {
  check_shape(*this, X);
  if (mask_mode_) {
    const double* x = X.data();
    for (int t = 0; t < p_; ++t) out[t] = x[offsets_[static_cast<std::size_t>(t)]];
    return;
  }
  std::vector<double> v;
  vectorize(X, v);
  matvec(op_, v.data(), out);
}

std::vector<double> MeasurementMap::apply(const DenseMatrix& X) const {
  std::vector<double> out(static_cast<std::size_t>(p_));
  apply_into(X, out.data());
  return out;
}

void MeasurementMap::adjoint_into(const double* y, DenseMatrix& out) const {
  if (out.rows() != rows_ || out.cols() != cols_) out = DenseMatrix(rows_, cols_);
  if (mask_mode_) {
    out.set_zero();
    double* x = out.data();
    for (int t = 0; t < p_; ++t) x[offsets_[static_cast<std::size_t>(t)]] = y[t];
    return;
  }
  std::vector<double> v(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_));
  matvec_t(op_, y, v.data());
  unvectorize(v, out);
}

DenseMatrix MeasurementMap::adjoint(const std::vector<double>& y) const {
  if (static_cast<int>(y.size()) != p_) {
    throw std::invalid_argument("adjoint: measurement vector has the wrong length");
  }
  DenseMatrix out(rows_, cols_);
  adjoint_into(y.data(), out);
  return out;
}

double MeasurementMap::gradient_into(const DenseMatrix& X,
                                     const std::vector<double>& b,
                                     DenseMatrix& grad,
                                     std::vector<double>& scratch) const {
  if (static_cast<int>(b.size()) != p_) {
    throw std::invalid_argument("gradient: measurement vector has the wrong length");
  }
  scratch.resize(static_cast<std::size_t>(p_));
  apply_into(X, scratch.data());
  for (int t = 0; t < p_; ++t) scratch[static_cast<std::size_t>(t)] -= b[static_cast<std::size_t>(t)];
  adjoint_into(scratch.data(), grad);
  return kernels::sumsq(scratch.data(), scratch.size());
}

DenseMatrix MeasurementMap::gradient(const DenseMatrix& X,
                                     const std::vector<double>& b) const {
  DenseMatrix g(rows_, cols_);
  std::vector<double> scratch;
  gradient_into(X, b, g, scratch);
  return g;
}

}  // namespace fpc
