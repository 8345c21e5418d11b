#include "ncheat/la/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ncheat::la {

Matrix hermitize(const Matrix& A) {
  Matrix H(A.rows(), A.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) H(i, j) = 0.5 * (A(i, j) + std::conj(A(j, i)));
  return H;
}

namespace {

double offdiag_norm(const Matrix& W) {
  double s = 0.0;
  for (int i = 0; i < W.rows(); ++i)
    for (int j = i + 1; j < W.cols(); ++j) s += std::norm(W(i, j));
  return std::sqrt(2.0 * s);
}

}  // namespace

EigResult eigh(const Matrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("eigh: matrix not square");
  const int n = A.rows();
  Matrix W = hermitize(A);
  Matrix V = Matrix::identity(n);

  const double scale = std::max(W.frobenius(), 1e-300);
  const double tol = 1e-15 * scale;
  const int max_sweeps = 60;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (offdiag_norm(W) <= tol) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const cplx b = W(p, q);
        const double ab = std::abs(b);
        if (ab <= 1e-300) {
          W(p, q) = 0.0;
          W(q, p) = 0.0;
          continue;
        }
        const cplx phase = b / ab;
        const double app = W(p, p).real();
        const double aqq = W(q, q).real();
        const double tau = (aqq - app) / (2.0 * ab);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cplx sp = s * phase;        // s e^{i phi}
        const cplx spc = std::conj(sp);   // s e^{-i phi}

        // Columns p,q of W: W <- W J
        for (int k = 0; k < n; ++k) {
          const cplx wkp = W(k, p), wkq = W(k, q);
          W(k, p) = c * wkp - spc * wkq;
          W(k, q) = sp * wkp + c * wkq;
        }
        // Rows p,q of W: W <- J^dagger W
        for (int k = 0; k < n; ++k) {
          const cplx wpk = W(p, k), wqk = W(q, k);
          W(p, k) = c * wpk - sp * wqk;
          W(q, k) = spc * wpk + c * wqk;
        }
        W(p, q) = 0.0;
        W(q, p) = 0.0;
        W(p, p) = cplx(W(p, p).real(), 0.0);
        W(q, q) = cplx(W(q, q).real(), 0.0);

        for (int k = 0; k < n; ++k) {
          const cplx vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - spc * vkq;
          V(k, q) = sp * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) vals[i] = W(i, i).real();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });

  EigResult r;
  r.values.resize(n);
  r.vectors = Matrix(n, n);
  for (int j = 0; j < n; ++j) {
    r.values[j] = vals[order[j]];
    for (int i = 0; i < n; ++i) r.vectors(i, j) = V(i, order[j]);
  }
  return r;
}

Matrix apply_spectral(const EigResult& e, const std::function<double(double)>& f) {
  const int n = static_cast<int>(e.values.size());
  Matrix out(n, n);
  // out = sum_k f(lambda_k) v_k v_k^dagger
  for (int k = 0; k < n; ++k) {
    const double fk = f(e.values[k]);
    if (fk == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      const cplx vik = fk * e.vectors(i, k);
      for (int j = 0; j < n; ++j) out(i, j) += vik * std::conj(e.vectors(j, k));
    }
  }
  return out;
}

double min_eigenvalue(const Matrix& A) {
  auto e = eigh(A);
  return e.values.front();
}

}  // namespace ncheat::la
