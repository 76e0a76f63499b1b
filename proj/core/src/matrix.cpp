#include "stage/num/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace stage::num {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix DenseMatrix::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  DenseMatrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (row.size() != m.cols_) {
      throw std::invalid_argument("from_rows: ragged initializer");
    }
    std::size_t c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::matmul(const DenseMatrix& other) const {
  if (cols_ != other.rows_) {
    throw std::invalid_argument("matmul: inner dimensions disagree");
  }
  DenseMatrix out(rows_, other.cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double* a = data_.data() + r * cols_;
    double* o = out.data() + r * other.cols_;
    for (std::size_t k = 0; k < cols_; ++k) {
      const double av = a[k];
      if (av == 0.0) continue;
      const double* b = other.data() + k * other.cols_;
      for (std::size_t c = 0; c < other.cols_; ++c) o[c] += av * b[c];
    }
  }
  return out;
}

DenseMatrix DenseMatrix::matmul_transposed(const DenseMatrix& other) const {
  if (cols_ != other.cols_) {
    throw std::invalid_argument("matmul_transposed: inner dimensions disagree");
  }
  DenseMatrix out(rows_, other.rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double* a = data_.data() + r * cols_;
    for (std::size_t c = 0; c < other.rows_; ++c) {
      const double* b = other.data() + c * cols_;
      double acc = 0.0;
      for (std::size_t k = 0; k < cols_; ++k) acc += a[k] * b[k];
      out(r, c) = acc;
    }
  }
  return out;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  }
  return out;
}

void DenseMatrix::fill(double v) {
  for (double& x : data_) x = v;
}

void DenseMatrix::add_scaled(const DenseMatrix& other, double scale) {
  if (!same_shape(other)) {
    throw std::invalid_argument("add_scaled: shape mismatch");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_[i] += scale * other.data_[i];
  }
}

void DenseMatrix::scale(double s) {
  for (double& x : data_) x *= s;
}

double DenseMatrix::frobenius_sq() const {
  double acc = 0.0;
  for (double x : data_) acc += x * x;
  return acc;
}

bool DenseMatrix::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dot: length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace stage::num
