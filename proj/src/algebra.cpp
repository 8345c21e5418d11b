#include "ncheat/algebra.hpp"

#include <cmath>
#include <numbers>

#include "ncheat/heat.hpp"
#include "ncheat/la/quadrature.hpp"

namespace ncheat {

std::vector<double> hermite_values(int nmax, double x) { return la::hermite_values(nmax, x); }

LadderMatrices ladder_matrices(const ModelConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_pad;
  LadderMatrices lm{Matrix(n, n), Matrix(n, n)};
  for (int k = 0; k + 1 < n; ++k) {
    const double c = std::sqrt((k + 1) / 2.0);
    lm.q(k, k + 1) = c;
    lm.q(k + 1, k) = c;
    lm.dq(k, k + 1) = c;    // (d/ds) h_{k+1} contributes +sqrt((k+1)/2) h_k
    lm.dq(k + 1, k) = -c;   // (d/ds) h_k contributes -sqrt((k+1)/2) h_{k+1}
  }
  return lm;
}

// Gauss-Hermite quadrature of the displacement kernel, centered at the
// overlap peak a/2 where the integrand carries exactly the e^{-x^2} weight.
Matrix weyl_matrix(int dim, double a, double b, int order) {
  const auto& q = la::gauss_hermite_compensated(order);
  // As[m][k] = h_m(x_k + a/2) * cw_k * e^{i b x_k},  Bt[k][n] = h_n(x_k - a/2)
  std::vector<cplx> as(static_cast<size_t>(dim) * order);
  std::vector<double> bt(static_cast<size_t>(order) * dim);
  for (int k = 0; k < order; ++k) {
    const double xk = q.x[k];
    const auto hs = hermite_values(dim, xk + 0.5 * a);
    const auto ht = hermite_values(dim, xk - 0.5 * a);
    const cplx ph = q.w[k] * std::exp(cplx(0.0, b * xk));
    for (int m = 0; m < dim; ++m) as[static_cast<size_t>(m) * order + k] = hs[m] * ph;
    for (int n = 0; n < dim; ++n) bt[static_cast<size_t>(k) * dim + n] = ht[n];
  }
  Matrix w(dim, dim);
  for (int m = 0; m < dim; ++m) {
    cplx* wm = w.data() + static_cast<size_t>(m) * dim;
    const cplx* am = as.data() + static_cast<size_t>(m) * order;
    for (int k = 0; k < order; ++k) {
      const cplx amk = am[k];
      const double* btk = bt.data() + static_cast<size_t>(k) * dim;
      for (int n = 0; n < dim; ++n) wm[n] += amk * btk[n];
    }
  }
  return w;
}

int weyl_quad_order(int dim, double b) {
  const int order = dim + 56 + static_cast<int>(std::ceil(0.35 * b * b));
  if (order > 320)
    throw QuadratureUnderresolved("weyl_matrix: displacement too large for stable quadrature");
  return order;
}

Matrix weyl_operator(const ModelConfig& cfg, const Vec2& zeta) {
  cfg.validate();
  const double rh = std::sqrt(cfg.h);
  const double a = rh * zeta[0];
  const double b = rh * zeta[1];
  Matrix w = weyl_matrix(cfg.n_pad, a, b, weyl_quad_order(cfg.n_pad, b));
  const double defect = weyl_unitarity_defect(cfg, w);
  if (defect > cfg.tol_leak)
    throw LeakageExceeded("weyl_operator: unitarity defect " + std::to_string(defect) +
                          " on working block (raise n_pad or shrink |zeta|)");
  return w;
}

double weyl_unitarity_defect(const ModelConfig& cfg, const Matrix& w) {
  Matrix g = matmul(w.adjoint(), w);
  double defect = 0.0;
  for (int i = 0; i < cfg.n; ++i)
    for (int j = 0; j < cfg.n; ++j) {
      const cplx expect = (i == j) ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
      defect = std::max(defect, std::abs(g(i, j) - expect));
    }
  return defect;
}

Operator lambda_theta(const ModelConfig& cfg, const std::function<cplx(double, double)>& f,
                      double support_radius, int gl_order) {
  cfg.validate();
  // Displacement entries across the box are Gaussians times polynomials of
  // degree up to 2 n_pad - 2, oscillating at frequency ~ sqrt(2 n_pad h);
  // the default rule resolves both.
  if (gl_order <= 0)
    gl_order = static_cast<int>(
                   std::ceil(0.35 * support_radius * std::sqrt(2.0 * cfg.n_pad * cfg.h))) +
               cfg.n_pad / 2 + 24;
  const auto q = la::gauss_legendre_on(gl_order, -support_radius, support_radius);

  // Sample the symbol first so negligible nodes can be skipped.
  std::vector<cplx> fv(static_cast<size_t>(gl_order) * gl_order);
  double fmax = 0.0;
  for (int i = 0; i < gl_order; ++i)
    for (int j = 0; j < gl_order; ++j) {
      const cplx v = f(q.x[i], q.x[j]);
      fv[static_cast<size_t>(i) * gl_order + j] = v;
      fmax = std::max(fmax, std::abs(v));
    }

  Matrix acc(cfg.n_pad, cfg.n_pad);
  for (int i = 0; i < gl_order; ++i)
    for (int j = 0; j < gl_order; ++j) {
      const cplx v = fv[static_cast<size_t>(i) * gl_order + j];
      if (std::abs(v) < 1e-16 * fmax) continue;
      const double rh = std::sqrt(cfg.h);
      Matrix w = weyl_matrix(cfg.n_pad, rh * q.x[i], rh * q.x[j],
                             weyl_quad_order(cfg.n_pad, rh * q.x[j]));
      w.axpy_to(acc, v * (q.w[i] * q.w[j]));
    }
  return Operator(std::move(acc));
}

Vec2 translation_vector(const ModelConfig& cfg, const Vec2& s) {
  return {-s[1] / cfg.h, s[0] / cfg.h};
}

Operator translate(const ModelConfig& cfg, const Vec2& s, const Operator& x) {
  const Vec2 a = translation_vector(cfg, s);
  Matrix w = weyl_operator(cfg, a);
  Matrix xp = (x.mat.rows() == cfg.n_pad) ? x.mat : x.mat.padded(cfg.n_pad, cfg.n_pad);
  Matrix y = sandwich(w, xp);
  Operator out(y.block(x.mat.rows(), x.mat.cols()), x.hermitian, x.positive);
  return out;
}

double calibrate_trace(const ModelConfig& cfg) {
  cfg.validate();
  const double tr1 = gaussian_operator(cfg, 1.0).mat.trace().real();
  if (tr1 <= 0.0) throw CalibrationUnstable("calibrate_trace: nonpositive Gaussian trace");
  const double c = 1.0 / tr1;
  for (double t : {0.5, 2.0}) {
    const double trt = gaussian_operator(cfg, t).mat.trace().real();
    if (std::abs(trt * c - 1.0) > 0.01)
      throw CalibrationUnstable("calibrate_trace: trace drift " + std::to_string(trt * c - 1.0) +
                                " at t=" + std::to_string(t) + " (raise n_pad)");
  }
  return c;
}

ModelConfig calibrate(ModelConfig cfg) {
  cfg.c_tau = calibrate_trace(cfg);
  return cfg;
}

}  // namespace ncheat
