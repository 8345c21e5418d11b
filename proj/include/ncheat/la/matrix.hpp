#pragma once

#include <complex>
#include <vector>
#include <cstddef>

namespace ncheat::la {

using cplx = std::complex<double>;

// Dense row-major complex matrix. Small fixed feature set: everything the
// operator model needs and nothing more.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}

  static Matrix identity(int n);
  static Matrix zero(int rows, int cols) { return Matrix(rows, cols); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return a_.empty(); }

  cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  const cplx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  cplx* data() { return a_.data(); }
  const cplx* data() const { return a_.data(); }

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(cplx s);

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, cplx s) { return a *= s; }
  friend Matrix operator*(cplx s, Matrix a) { return a *= s; }
  friend Matrix operator*(Matrix a, double s) { return a *= cplx(s, 0.0); }
  friend Matrix operator*(double s, Matrix a) { return a *= cplx(s, 0.0); }

  Matrix adjoint() const;
  cplx trace() const;
  double frobenius() const;
  double max_abs() const;

  // Top-left block copy / zero-padded embedding.
  Matrix block(int r, int c) const;
  Matrix padded(int r, int c) const;

  // Fused y += alpha * this, sizes must match.
  void axpy_to(Matrix& y, cplx alpha) const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<cplx> a_;
};

// C = A * B
Matrix matmul(const Matrix& A, const Matrix& B);
Matrix operator*(const Matrix& A, const Matrix& B);

// C += w * A * B (no temporary for the accumulation)
void matmul_acc(Matrix& C, const Matrix& A, const Matrix& B, cplx w);

// A * B * A^dagger, using only the first `bcols` columns of A when B is
// (bcols x bcols); result has full A dimension.
Matrix sandwich(const Matrix& A, const Matrix& B);
void sandwich_acc(Matrix& C, const Matrix& A, const Matrix& B, double w, Matrix& scratch);

double max_abs_diff(const Matrix& A, const Matrix& B);

}  // namespace ncheat::la
