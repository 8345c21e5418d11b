#include "ncheat/la/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ncheat::la {

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
  return *this;
}

Matrix& Matrix::operator*=(cplx s) {
  for (auto& v : a_) v *= s;
  return *this;
}

Matrix Matrix::adjoint() const {
  Matrix m(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
  return m;
}

cplx Matrix::trace() const {
  cplx t = 0.0;
  int n = std::min(rows_, cols_);
  for (int i = 0; i < n; ++i) t += (*this)(i, i);
  return t;
}

double Matrix::frobenius() const {
  double s = 0.0;
  for (const auto& v : a_) s += std::norm(v);
  return std::sqrt(s);
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (const auto& v : a_) m = std::max(m, std::abs(v));
  return m;
}

Matrix Matrix::block(int r, int c) const {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = (*this)(i, j);
  return m;
}

Matrix Matrix::padded(int r, int c) const {
  Matrix m(r, c);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j);
  return m;
}

void Matrix::axpy_to(Matrix& y, cplx alpha) const {
  for (size_t i = 0; i < a_.size(); ++i) y.a_[i] += alpha * a_[i];
}

Matrix matmul(const Matrix& A, const Matrix& B) {
  Matrix C(A.rows(), B.cols());
  matmul_acc(C, A, B, 1.0);
  return C;
}

Matrix operator*(const Matrix& A, const Matrix& B) { return matmul(A, B); }

void matmul_acc(Matrix& C, const Matrix& A, const Matrix& B, cplx w) {
  if (A.cols() != B.rows() || C.rows() != A.rows() || C.cols() != B.cols())
    throw std::invalid_argument("matmul: dimension mismatch");
  const int n = A.rows(), k = A.cols(), m = B.cols();
  // i-k-j order keeps the inner loop contiguous in both B and C.
  for (int i = 0; i < n; ++i) {
    cplx* ci = C.data() + static_cast<size_t>(i) * m;
    const cplx* ai = A.data() + static_cast<size_t>(i) * k;
    for (int l = 0; l < k; ++l) {
      const cplx a = w * ai[l];
      if (a == cplx(0.0, 0.0)) continue;
      const cplx* bl = B.data() + static_cast<size_t>(l) * m;
      for (int j = 0; j < m; ++j) ci[j] += a * bl[j];
    }
  }
}

Matrix sandwich(const Matrix& A, const Matrix& B) {
  Matrix C(A.rows(), A.rows());
  Matrix scratch;
  sandwich_acc(C, A, B, 1.0, scratch);
  return C;
}

void sandwich_acc(Matrix& C, const Matrix& A, const Matrix& B, double w, Matrix& scratch) {
  const int n = A.rows();
  const int b = B.rows();
  if (B.cols() != b || A.cols() < b)
    throw std::invalid_argument("sandwich: dimension mismatch");
  // T = A[:, :b] * B   (n x b)
  if (scratch.rows() != n || scratch.cols() != b) scratch = Matrix(n, b);
  else scratch *= 0.0;
  for (int i = 0; i < n; ++i) {
    cplx* ti = scratch.data() + static_cast<size_t>(i) * b;
    const cplx* ai = A.data() + static_cast<size_t>(i) * A.cols();
    for (int l = 0; l < b; ++l) {
      const cplx a = ai[l];
      const cplx* bl = B.data() + static_cast<size_t>(l) * b;
      for (int j = 0; j < b; ++j) ti[j] += a * bl[j];
    }
  }
  // C += w * T * A[:, :b]^dagger
  for (int i = 0; i < n; ++i) {
    cplx* ci = C.data() + static_cast<size_t>(i) * n;
    const cplx* ti = scratch.data() + static_cast<size_t>(i) * b;
    for (int j = 0; j < n; ++j) {
      const cplx* aj = A.data() + static_cast<size_t>(j) * A.cols();
      cplx s = 0.0;
      for (int l = 0; l < b; ++l) s += ti[l] * std::conj(aj[l]);
      ci[j] += w * s;
    }
  }
}

double max_abs_diff(const Matrix& A, const Matrix& B) {
  double m = 0.0;
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) m = std::max(m, std::abs(A(i, j) - B(i, j)));
  return m;
}

}  // namespace ncheat::la
