#include "ncheat/convexity.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ncheat/doi.hpp"
#include "ncheat/la/quadrature.hpp"
#include "ncheat/rng.hpp"

namespace ncheat {

Matrix CPMap::apply(const Matrix& x) const {
  if (kraus.empty()) throw Error("CPMap: empty Kraus family");
  Matrix acc(kraus.front().rows(), kraus.front().rows());
  for (const auto& k : kraus) acc += matmul(k, matmul(x, k.adjoint()));
  return acc;
}

void CPMap::validate_flags(double tol) {
  const int n = kraus.front().rows();
  Matrix u(n, n), t(n, n);
  for (const auto& k : kraus) {
    u += matmul(k, k.adjoint());
    t += matmul(k.adjoint(), k);
  }
  unital = la::max_abs_diff(u, Matrix::identity(n)) <= tol;
  trace_preserving = la::max_abs_diff(t, Matrix::identity(n)) <= tol;
}

CPMap random_unital_cp(int dim, int n_kraus, uint64_t seed) {
  if (dim < 2 || n_kraus < 1) throw Error("random_unital_cp: need dim >= 2, n_kraus >= 1");
  Rng rng(seed);
  CPMap phi;
  phi.kraus.reserve(n_kraus);
  for (int i = 0; i < n_kraus; ++i) phi.kraus.push_back(rng.gaussian_matrix(dim, dim));
  // Normalize: with G = sum K_i K_i^*, replace K_i by G^{-1/2} K_i.
  Matrix g(dim, dim);
  for (const auto& k : phi.kraus) g += matmul(k, k.adjoint());
  auto e = la::eigh(g);
  Matrix ginvsqrt = la::apply_spectral(e, [](double lam) { return 1.0 / std::sqrt(lam); });
  for (auto& k : phi.kraus) k = matmul(ginvsqrt, k);
  phi.validate_flags();
  if (!phi.unital) throw Error("random_unital_cp: normalization failed");
  return phi;
}

double jensen_gap(const CPMap& phi, const Matrix& u, double p) {
  if (p < 1.0 || p > 2.0)
    throw InvalidExponent("jensen_gap: inequality range is 1 <= p <= 2 (probe outside manually)");
  Matrix up = matrix_power(u, p);
  Matrix gap = phi.apply(up) - matrix_power(phi.apply(u), p);
  return la::min_eigenvalue(gap);
}

bool schur_positive(const Matrix& a, const Matrix& b, const Matrix& c) {
  const int n = a.rows();
  if (a.cols() != n || b.rows() != n || b.cols() != n || c.rows() != n || c.cols() != n)
    throw DimensionMismatch("schur_positive: blocks must be square and same size");
  auto ea = la::eigh(a);
  const double amin = ea.values.front(), amax = ea.values.back();
  if (amin <= 1e-10 * std::max(amax, 1e-300))
    throw IllConditioned("schur_positive: A not safely invertible");

  const double scale = std::max({amax, b.max_abs(), c.max_abs(), 1e-300});
  const double tol = 1e-10 * scale;

  Matrix block(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      block(i, j) = a(i, j);
      block(i, n + j) = b(i, j);
      block(n + i, j) = std::conj(b(j, i));
      block(n + i, n + j) = c(i, j);
    }
  const bool block_pos = la::min_eigenvalue(block) >= -tol;

  Matrix ainv = la::apply_spectral(ea, [](double lam) { return 1.0 / lam; });
  Matrix comp = c - matmul(b.adjoint(), matmul(ainv, b));
  const bool comp_pos = la::min_eigenvalue(comp) >= -tol;

  if (block_pos != comp_pos)
    throw IllConditioned("schur_positive: block test and complement test disagree");
  return block_pos;
}

double power_integral_check(const Matrix& x, double p, int quad_nodes) {
  if (p <= 1.0 || p >= 2.0) throw InvalidExponent("power_integral_check: need 1 < p < 2");
  auto e = la::eigh(x);
  if (e.values.front() < 1e-6 || e.values.back() > 1e6)
    throw Error("power_integral_check: spectrum outside [1e-6, 1e6]");

  // x^p = (|sin(p pi)| / pi) * integral over t of t^{1-p} x^2 (t + x)^{-1};
  // after t = e^s the integrand decays like e^{-(p-1)s} and e^{(2-p)s}, so
  // the truncation widens near both exponent endpoints. Composite rule on
  // unit panels: the integrand varies on scale 1 in s.
  const double rate = std::min(p - 1.0, 2.0 - p);
  const double span = std::max(40.0, 42.0 / rate);
  if (quad_nodes <= 0) quad_nodes = 8;  // per unit panel

  const auto& base = la::gauss_legendre(quad_nodes);
  const double pref = std::abs(std::sin(p * std::numbers::pi)) / std::numbers::pi;
  const int panels = static_cast<int>(std::ceil(2.0 * span));

  double worst = 0.0;
  for (double lam : e.values) {
    double acc = 0.0;
    for (int pan = 0; pan < panels; ++pan) {
      const double lo = -span + pan * (2.0 * span / panels);
      const double half = span / panels;
      for (int k = 0; k < quad_nodes; ++k) {
        const double s = lo + half * (base.x[k] + 1.0);
        const double t = std::exp(s);
        acc += half * base.w[k] * std::pow(t, 2.0 - p) * lam * lam / (t + lam);
      }
    }
    const double exact = std::pow(lam, p);
    worst = std::max(worst, std::abs(pref * acc - exact) / exact);
  }
  return worst;
}

std::string serialize_jensen_case(const CPMap& phi, const Matrix& u, double p, uint64_t seed) {
  std::ostringstream os;
  os.precision(17);
  os << "jensen-case\np = " << p << "\nseed = " << seed << "\ndim = " << u.rows()
     << "\nn_kraus = " << phi.kraus.size() << "\n";
  auto dump = [&](const std::string& name, const Matrix& m) {
    os << name << " =";
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) os << ' ' << m(i, j).real() << ' ' << m(i, j).imag();
    os << "\n";
  };
  for (size_t i = 0; i < phi.kraus.size(); ++i) dump("K" + std::to_string(i), phi.kraus[i]);
  dump("u", u);
  return os.str();
}

}  // namespace ncheat
