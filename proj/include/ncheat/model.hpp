#pragma once

#include "ncheat/errors.hpp"
#include "ncheat/la/eig.hpp"
#include "ncheat/la/matrix.hpp"

namespace ncheat {

using la::cplx;
using la::Matrix;

// Truncated matrix model of the Moyal plane: operators live on an N x N
// working block inside an N_pad x N_pad padded space; channels are applied
// at the padded size and projected back.
struct ModelConfig {
  int n = 48;              // working block dimension
  int n_pad = 96;          // padded dimension used when applying channels
  double h = 1.0;          // deformation scale, theta = h * [[0,-1],[1,0]]
  int quad_order = 20;     // Gauss-Hermite nodes per axis for heat channels
  double c_tau = 0.0;      // trace calibration constant, set by calibrate()
  double tol_leak = 1e-6;  // truncation-leakage tolerance

  void validate() const {
    if (n < 2 || n_pad < n) throw Error("ModelConfig: need n_pad >= n >= 2");
    if (quad_order < 4) throw Error("ModelConfig: quad_order >= 4 required");
    if (h <= 0.0) throw Error("ModelConfig: h must be positive");
    if (tol_leak <= 0.0) throw Error("ModelConfig: tol_leak must be positive");
  }
  bool calibrated() const { return c_tau > 0.0; }
  void require_calibrated() const {
    if (!calibrated()) throw Error("ModelConfig: trace not calibrated (run calibrate first)");
  }
};

// An element of the truncated algebra. Flags are advisory and revalidated
// on demand; they let positivity-preserving paths skip re-checks.
struct Operator {
  Matrix mat;
  bool hermitian = false;
  bool positive = false;

  Operator() = default;
  explicit Operator(Matrix m, bool herm = false, bool pos = false)
      : mat(std::move(m)), hermitian(herm), positive(pos) {}

  int dim() const { return mat.rows(); }

  bool check_hermitian(double rel_tol = 1e-12) const {
    const double scale = std::max(mat.max_abs(), 1e-300);
    return la::max_abs_diff(mat, mat.adjoint()) <= rel_tol * scale;
  }
  bool check_positive(double rel_tol = 1e-10) const {
    if (!check_hermitian(1e-10)) return false;
    auto e = la::eigh(mat);
    const double top = std::max(std::abs(e.values.front()), std::abs(e.values.back()));
    return e.values.front() >= -rel_tol * std::max(top, 1e-300);
  }
};

inline Operator operator+(const Operator& a, const Operator& b) {
  return Operator(a.mat + b.mat, a.hermitian && b.hermitian, false);
}
inline Operator operator*(double s, const Operator& a) {
  return Operator(s * a.mat, a.hermitian, a.positive && s >= 0.0);
}

}  // namespace ncheat
