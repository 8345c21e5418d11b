#include "ncheat/doi.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ncheat/la/fft.hpp"
#include "ncheat/lp.hpp"
#include "ncheat/rng.hpp"

namespace ncheat {

double phi_value(const PhiKernel& kernel, double lam, double mu) {
  const double p = kernel.p;
  if (lam < 0.0 || mu < 0.0) throw Error("phi_value: arguments must be nonnegative");
  if (lam == 0.0 || mu == 0.0) return 1.0;
  const double rel = std::abs(lam - mu) / (lam + mu);
  if (rel < 1e-8) {
    // Removable singularity: (lam^p - mu^p)/(lam - mu) -> p m^{p-1} at the
    // midpoint m, accurate to O(rel^2).
    const double m = 0.5 * (lam + mu);
    return p * std::pow(m, p - 1.0) / (std::pow(lam, p - 1.0) + std::pow(mu, p - 1.0));
  }
  return (std::pow(lam, p) - std::pow(mu, p)) /
         ((lam - mu) * (std::pow(lam, p - 1.0) + std::pow(mu, p - 1.0)));
}

namespace {

// log(sinh|x|) and log(cosh x) without overflow.
double log_sinh_abs(double x) {
  const double a = std::abs(x);
  return a + std::log1p(-std::exp(-2.0 * a)) - std::numbers::ln2;
}
double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

}  // namespace

double psi_profile(double p, double t) {
  if (p <= 1.0) throw InvalidExponent("psi_profile: p must exceed 1");
  const double alpha = 0.5 * p - 1.0;
  const double beta = 0.5 * (p - 1.0);
  if (t == 0.0) return p - 2.0;
  if (alpha == 0.0) return 0.0;
  const double sign = (alpha * t >= 0.0 ? 1.0 : -1.0);
  const double logmag = log_sinh_abs(alpha * t) - log_cosh(beta * t) - log_sinh_abs(0.5 * t);
  const double tsign = (t >= 0.0 ? 1.0 : -1.0);
  return sign * tsign * std::exp(logmag);
}

double doi_constant(double p, const CpGrid& grid) {
  if (p <= 1.0) throw InvalidExponent("doi_constant: p must exceed 1");
  if (p == 2.0) return 1.0;  // the profile vanishes identically
  if (grid.extent < 1.0 || grid.samples < 64 || !la::is_pow2(grid.samples))
    throw Error("doi_constant: bad grid");

  auto l1_fourier = [&](double extent, int n) {
    const double dt = 2.0 * extent / n;
    std::vector<cplx> a(n);
    for (int j = 0; j < n; ++j) a[j] = psi_profile(p, -extent + j * dt);
    la::fft(a, false);
    // |fhat(xi_k)| = dt |FFT_k|; integrate over the FFT frequency window
    // with spacing 2 pi / (n dt).
    const double dxi = 2.0 * std::numbers::pi / (n * dt);
    double s = 0.0;
    for (const auto& v : a) s += std::abs(v);
    return s * dt * dxi;
  };

  const double coarse = l1_fourier(grid.extent, grid.samples);
  const double fine = l1_fourier(2.0 * grid.extent, 4 * grid.samples);
  if (std::abs(fine - coarse) > 0.005 * std::max(fine, 1e-30))
    throw NotConverged("doi_constant: grid doubling changed the value by more than 0.5%");
  return 1.0 + 0.5 * fine;
}

SpectralPair make_spectral_pair(const Matrix& a, const Matrix& b) {
  auto ea = la::eigh(a);
  auto eb = la::eigh(b);
  SpectralPair pr;
  pr.a_eigvals = std::move(ea.values);
  pr.b_eigvals = std::move(eb.values);
  pr.a_basis = std::move(ea.vectors);
  pr.b_basis = std::move(eb.vectors);
  return pr;
}

Matrix doi_apply(const SpectralPair& pair, const std::function<double(double, double)>& phi,
                 const Matrix& x) {
  const int n = static_cast<int>(pair.a_eigvals.size());
  const int m = static_cast<int>(pair.b_eigvals.size());
  if (x.rows() != n || x.cols() != m) throw DimensionMismatch("doi_apply: dimension mismatch");
  Matrix mid = matmul(pair.a_basis.adjoint(), matmul(x, pair.b_basis));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) mid(i, j) *= phi(pair.a_eigvals[i], pair.b_eigvals[j]);
  return matmul(pair.a_basis, matmul(mid, pair.b_basis.adjoint()));
}

Matrix matrix_power(const Matrix& u, double p) {
  if (p < 0.0) throw InvalidExponent("matrix_power: p must be nonnegative");
  auto e = la::eigh(u);
  const double top = std::max({std::abs(e.values.front()), std::abs(e.values.back()), 1e-300});
  if (e.values.front() < -1e-8 * top)
    throw NotPositive("matrix_power: min eigenvalue " + std::to_string(e.values.front()));
  const double floor = 1e-12 * top;
  return la::apply_spectral(e, [&](double lam) {
    if (lam <= 0.0) return 0.0;
    if (p == 0.0) return lam > floor ? 1.0 : 0.0;  // support projection
    return std::pow(lam, p);
  });
}

std::string serialize_pair(double p, double q, uint64_t seed, const Matrix& a, const Matrix& b) {
  std::ostringstream os;
  os.precision(17);
  os << "nonlinearity-counterexample\n";
  os << "p = " << p << "\nq = " << q << "\nseed = " << seed << "\ndim = " << a.rows() << "\n";
  auto dump = [&](const char* name, const Matrix& m) {
    os << name << " =";
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) os << ' ' << m(i, j).real() << ' ' << m(i, j).imag();
    os << "\n";
  };
  dump("A", a);
  dump("B", b);
  return os.str();
}

NonlinearityReport verify_nonlinearity(double p, double q, int trials, int dim, uint64_t seed) {
  if (p < 1.0) throw InvalidExponent("verify_nonlinearity: p must be >= 1");
  if (q < 1.0 && !std::isinf(q)) throw InvalidExponent("verify_nonlinearity: q must be >= 1");

  NonlinearityReport rep;
  rep.p = p;
  rep.q = q;
  rep.trials = trials;
  rep.c_p = (p == 1.0) ? 1.0 : doi_constant(p);

  // Unweighted Schatten norms: the bound is invariant under trace weighting.
  ModelConfig flat;
  flat.n = dim;
  flat.n_pad = dim;
  flat.c_tau = 1.0;
  const double pq = std::isinf(q) ? std::numeric_limits<double>::infinity() : p * q;

  PhiKernel kernel{p};
  for (int trial = 0; trial < trials; ++trial) {
    const uint64_t s = Rng::derive(seed, trial);
    Rng rng(s);
    Matrix a = rng.random_positive(dim);
    Matrix b = rng.random_positive(dim);

    Matrix ap = matrix_power(a, p);
    Matrix bp = matrix_power(b, p);
    Matrix apm1 = matrix_power(a, p - 1.0);
    Matrix bpm1 = matrix_power(b, p - 1.0);
    Matrix diff = a - b;
    Matrix rhs = matmul(apm1, diff) + matmul(diff, bpm1);
    Matrix lhs = ap - bp;

    // Exact transformer identity.
    auto pair = make_spectral_pair(a, b);
    Matrix recon =
        doi_apply(pair, [&](double l, double m) { return phi_value(kernel, l, m); }, rhs);
    const double scale = std::max(lhs.frobenius(), 1e-300);
    rep.max_identity_residual =
        std::max(rep.max_identity_residual, (recon - lhs).frobenius() / scale);

    const double lq = lp_norm(flat, Operator(lhs), q);
    const double rq = lp_norm(flat, Operator(rhs), q);
    if (rq > 1e-300) {
      const double ratio = lq / rq;
      rep.max_transformer_ratio = std::max(rep.max_transformer_ratio, ratio);
      if (ratio > rep.c_p * (1.0 + 1e-9))
        throw BoundViolated("verify_nonlinearity: transformer bound violated, ratio " +
                                std::to_string(ratio),
                            serialize_pair(p, q, s, a, b));
    }

    const double dpq = lp_norm(flat, Operator(diff), pq);
    const double apq = lp_norm(flat, Operator(a), pq);
    const double bpq = lp_norm(flat, Operator(b), pq);
    const double denom = dpq * (std::pow(apq, p - 1.0) + std::pow(bpq, p - 1.0));
    if (denom > 1e-300) {
      const double ratio = lq / denom;
      rep.max_product_ratio = std::max(rep.max_product_ratio, ratio);
      if (ratio > rep.c_p * (1.0 + 1e-9))
        throw BoundViolated("verify_nonlinearity: product-form bound violated, ratio " +
                                std::to_string(ratio),
                            serialize_pair(p, q, s, a, b));
    }

    // Self-adjoint (non-positive) variant through absolute values; the
    // constant depends on an external Lipschitz bound, so only report.
    if (!std::isinf(q) && q > 1.0) {
      Matrix ha = la::hermitize(rng.gaussian_matrix(dim, dim));
      Matrix hb = la::hermitize(rng.gaussian_matrix(dim, dim));
      Matrix absa = matrix_power(matmul(ha.adjoint(), ha), 0.5);
      Matrix absb = matrix_power(matmul(hb.adjoint(), hb), 0.5);
      Matrix alhs = matrix_power(absa, p) - matrix_power(absb, p);
      Matrix hdiff = ha - hb;
      const double hd = lp_norm(flat, Operator(hdiff), pq);
      const double na = lp_norm(flat, Operator(ha), pq);
      const double nb = lp_norm(flat, Operator(hb), pq);
      const double aden = hd * (std::pow(na, p - 1.0) + std::pow(nb, p - 1.0));
      if (aden > 1e-300)
        rep.max_absvalue_ratio =
            std::max(rep.max_absvalue_ratio, lp_norm(flat, Operator(alhs), q) / aden);
    }
  }
  return rep;
}

}  // namespace ncheat
