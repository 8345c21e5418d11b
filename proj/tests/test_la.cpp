#include "doctest.h"

#include <cmath>
#include <numbers>

#include "ncheat/la/eig.hpp"
#include "ncheat/la/fft.hpp"
#include "ncheat/la/matrix.hpp"
#include "ncheat/la/quadrature.hpp"
#include "ncheat/rng.hpp"

using namespace ncheat;
using la::Matrix;

TEST_CASE("matmul and adjoint basics") {
  Rng rng(7);
  Matrix a = rng.gaussian_matrix(5, 3);
  Matrix b = rng.gaussian_matrix(3, 4);
  Matrix c = matmul(a, b);
  la::cplx expect = 0.0;
  for (int k = 0; k < 3; ++k) expect += a(2, k) * b(k, 1);
  CHECK(std::abs(c(2, 1) - expect) < 1e-12);
  CHECK(la::max_abs_diff(matmul(a, b).adjoint(), matmul(b.adjoint(), a.adjoint())) < 1e-12);
}

TEST_CASE("sandwich equals dense conjugation") {
  Rng rng(11);
  Matrix w = rng.gaussian_matrix(6, 6);
  Matrix u = rng.gaussian_matrix(4, 4);
  Matrix up = u.padded(6, 6);
  Matrix direct = matmul(w, matmul(up, w.adjoint()));
  Matrix fast = la::sandwich(w, u);
  CHECK(la::max_abs_diff(direct, fast) < 1e-12);
}

TEST_CASE("hermitian eigensolver reconstructs and orders") {
  Rng rng(3);
  Matrix h = la::hermitize(rng.gaussian_matrix(12, 12));
  auto e = la::eigh(h);
  for (size_t i = 1; i < e.values.size(); ++i) CHECK(e.values[i] >= e.values[i - 1]);
  Matrix recon = la::apply_spectral(e, [](double x) { return x; });
  CHECK(la::max_abs_diff(recon, h) < 1e-11 * h.max_abs());
  Matrix g = matmul(e.vectors.adjoint(), e.vectors);
  CHECK(la::max_abs_diff(g, Matrix::identity(12)) < 1e-12);
}

TEST_CASE("eigensolver handles degenerate spectra") {
  Matrix m(4, 4);
  m(0, 0) = 2.0;
  m(1, 1) = 2.0;
  m(2, 2) = -1.0;
  m(3, 3) = -1.0;
  m(0, 1) = la::cplx(0.0, 0.5);
  m(1, 0) = la::cplx(0.0, -0.5);
  auto e = la::eigh(m);
  Matrix recon = la::apply_spectral(e, [](double x) { return x; });
  CHECK(la::max_abs_diff(recon, m) < 1e-12);
}

TEST_CASE("gauss-hermite integrates moments of the weight") {
  const auto& q = la::gauss_hermite(24);
  double m0 = 0, m2 = 0, m4 = 0;
  for (int i = 0; i < 24; ++i) {
    m0 += q.w[i];
    m2 += q.w[i] * q.x[i] * q.x[i];
    m4 += q.w[i] * std::pow(q.x[i], 4);
  }
  const double rp = std::sqrt(std::numbers::pi);
  CHECK(m0 == doctest::Approx(rp).epsilon(1e-13));
  CHECK(m2 == doctest::Approx(0.5 * rp).epsilon(1e-13));
  CHECK(m4 == doctest::Approx(0.75 * rp).epsilon(1e-13));
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  const auto q = la::gauss_legendre_on(12, 0.0, 2.0);
  double s5 = 0;
  for (int i = 0; i < 12; ++i) s5 += q.w[i] * std::pow(q.x[i], 5);
  CHECK(s5 == doctest::Approx(64.0 / 6.0).epsilon(1e-13));
}

TEST_CASE("fft matches the direct transform and inverts") {
  Rng rng(5);
  std::vector<la::cplx> a(16);
  for (auto& v : a) v = rng.normal_cplx();
  auto b = a;
  la::fft(b, false);
  la::cplx x3 = 0.0;
  for (int j = 0; j < 16; ++j)
    x3 += a[j] * std::exp(la::cplx(0, -2.0 * std::numbers::pi * 3.0 * j / 16.0));
  CHECK(std::abs(b[3] - x3) < 1e-12);
  la::fft(b, true);
  for (int j = 0; j < 16; ++j) CHECK(std::abs(b[j] - a[j]) < 1e-12);
}
