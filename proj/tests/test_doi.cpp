#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "ncheat/doi.hpp"
#include "ncheat/rng.hpp"

using namespace ncheat;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("phi symbol values") {
  PhiKernel p2{2.0};
  CHECK(phi_value(p2, 0.7, 2.1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(phi_value(p2, 3.0, 3.0) == doctest::Approx(1.0).epsilon(1e-14));

  PhiKernel p3{3.0};
  CHECK(phi_value(p3, 2.0, 1.0) == doctest::Approx(1.4).epsilon(1e-14));
  CHECK(phi_value(p3, 2.0, 2.0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(phi_value(p3, 0.0, 5.0) == 1.0);
  CHECK(phi_value(p3, 5.0, 0.0) == 1.0);
  // near-diagonal stability
  CHECK(phi_value(p3, 1.0, 1.0 + 1e-13) == doctest::Approx(1.5).epsilon(1e-10));
}

TEST_CASE("psi profile: closed forms and decay") {
  CHECK(psi_profile(2.0, 1.3) == 0.0);
  // p = 3 collapses to sech
  for (double t : {0.0, 0.5, 2.0, -3.0, 17.0})
    CHECK(psi_profile(3.0, t) == doctest::Approx(1.0 / std::cosh(t)).epsilon(1e-13));
  CHECK(psi_profile(3.0, 0.0) == doctest::Approx(3.0 - 2.0));
  CHECK(psi_profile(1.5, 0.0) == doctest::Approx(-0.5));

  for (double p : {1.5, 3.0, 5.0}) {
    const double c = 4.0 * std::max(1.0, std::abs(p - 2.0));
    for (double t = 0.0; t <= 40.0; t += 0.5) {
      CHECK(std::abs(psi_profile(p, t)) <= c * std::exp(-0.5 * t));
      CHECK(std::abs(psi_profile(p, -t)) <= c * std::exp(-0.5 * t));
    }
  }
}

TEST_CASE("psi profile is the log-ratio form of the symbol") {
  Rng rng(31);
  for (double p : {1.5, 2.7, 4.0}) {
    PhiKernel k{p};
    for (int trial = 0; trial < 200; ++trial) {
      const double lam = std::exp(3.0 * rng.normal());
      const double mu = std::exp(3.0 * rng.normal());
      const double psi = 2.0 * (phi_value(k, lam, mu) - 1.0);
      CHECK(std::abs(psi - psi_profile(p, std::log(lam / mu))) < 1e-12);
    }
  }
}

TEST_CASE("transformer constant: exact values and convergence") {
  CHECK(doi_constant(2.0) == 1.0);
  // p = 3: profile sech, Fourier transform pi sech(pi xi / 2), L1 norm 2 pi
  CHECK(doi_constant(3.0) == doctest::Approx(1.0 + std::numbers::pi).epsilon(5e-3));
  const double c15a = doi_constant(1.5);
  const double c15b = doi_constant(1.5, CpGrid{80.0, 1 << 16});
  CHECK(c15a == doctest::Approx(c15b).epsilon(5e-3));
  CHECK(c15a >= 1.0);
  // c_p approaches 1 near p = 2
  CHECK(doi_constant(1.9) < doi_constant(1.5));
  CHECK(doi_constant(2.1) < doi_constant(3.0));
}

TEST_CASE("doi apply: identity symbol, hermiticity, contractivity") {
  Rng rng(44);
  Matrix a = rng.random_positive(8);
  Matrix b = rng.random_positive(8);
  auto pair = make_spectral_pair(a, b);
  Matrix x = rng.gaussian_matrix(8, 8);

  Matrix same = doi_apply(pair, [](double, double) { return 1.0; }, x);
  CHECK(la::max_abs_diff(same, x) < 1e-11 * x.max_abs());

  // symmetric bounded symbol: Hermiticity preserved on Hermitian input, and
  // Frobenius norm contracts when |phi| <= 1
  auto sym = [](double l, double m) { return 1.0 / (1.0 + l + m); };
  Matrix xh = la::hermitize(x);
  auto pair_same = make_spectral_pair(a, a);
  Matrix out = doi_apply(pair_same, sym, xh);
  CHECK(la::max_abs_diff(out, out.adjoint()) < 1e-11 * out.max_abs());
  CHECK(out.frobenius() <= xh.frobenius() * (1.0 + 1e-12));

  // equal-operator case acts entrywise in the eigenbasis
  PhiKernel k{2.7};
  Matrix got = doi_apply(pair_same, [&](double l, double m) { return phi_value(k, l, m); }, xh);
  auto ea = la::eigh(a);
  Matrix mid = matmul(ea.vectors.adjoint(), matmul(xh, ea.vectors));
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) mid(i, j) *= phi_value(k, ea.values[i], ea.values[j]);
  Matrix expect = matmul(ea.vectors, matmul(mid, ea.vectors.adjoint()));
  CHECK(la::max_abs_diff(got, expect) < 1e-11 * expect.max_abs());
  for (int i = 0; i < 8; ++i)
    CHECK(phi_value(k, ea.values[i], ea.values[i]) == doctest::Approx(2.7 / 2.0).epsilon(1e-12));
}

TEST_CASE("matrix power: functional calculus basics") {
  Rng rng(9);
  Matrix u = rng.random_positive(6);
  CHECK(la::max_abs_diff(matrix_power(u, 1.0), u) < 1e-12 * u.max_abs());

  Matrix root = matrix_power(u, 0.5);
  CHECK(la::max_abs_diff(matmul(root, root), u) < 1e-10 * u.max_abs());

  Matrix proj = matrix_power(u, 0.0);
  CHECK(la::max_abs_diff(proj, Matrix::identity(6)) < 1e-10);  // full rank

  Matrix neg = Matrix::identity(3);
  neg(2, 2) = -0.5;
  CHECK_THROWS_AS((void)matrix_power(neg, 1.5), NotPositive);
}

TEST_CASE("exact transformer identity on random positive pairs") {
  Rng rng(123);
  for (double p : {1.5, 2.0, 2.7, 4.0}) {
    PhiKernel k{p};
    for (int trial = 0; trial < 8; ++trial) {
      Matrix a = rng.random_positive(12);
      Matrix b = rng.random_positive(12);
      Matrix lhs = matrix_power(a, p) - matrix_power(b, p);
      Matrix diff = a - b;
      Matrix rhs = matmul(matrix_power(a, p - 1.0), diff) + matmul(diff, matrix_power(b, p - 1.0));
      auto pair = make_spectral_pair(a, b);
      Matrix recon = doi_apply(pair, [&](double l, double m) { return phi_value(k, l, m); }, rhs);
      CHECK((recon - lhs).frobenius() <= 1e-10 * std::max(lhs.frobenius(), 1.0));
    }
  }
}

TEST_CASE("nonlinearity verification reports bounded ratios") {
  // p = 2 is an exact algebraic identity: ratio at most 1
  auto rep2 = verify_nonlinearity(2.0, 2.0, 40, 8, 7001);
  CHECK(rep2.c_p == 1.0);
  CHECK(rep2.max_transformer_ratio <= 1.0 + 1e-10);
  CHECK(rep2.max_identity_residual < 1e-10);

  auto rep3 = verify_nonlinearity(3.0, 2.0, 40, 10, 7002);
  CHECK(rep3.max_transformer_ratio <= 1.0 + std::numbers::pi);
  CHECK(rep3.max_product_ratio <= 1.0 + std::numbers::pi);
  CHECK(rep3.max_absvalue_ratio > 0.0);

  // p = 1: both sides are exact multiples, ratio identically 1/2
  auto rep1 = verify_nonlinearity(1.0, 2.0, 10, 6, 7003);
  CHECK(rep1.max_transformer_ratio == doctest::Approx(0.5).epsilon(1e-9));

  auto repinf = verify_nonlinearity(2.5, kInf, 10, 6, 7004);
  CHECK(repinf.max_transformer_ratio <= repinf.c_p + 1e-9);
}

TEST_CASE("counterexample serialization carries the pair") {
  Rng rng(5);
  Matrix a = rng.random_positive(2);
  Matrix b = rng.random_positive(2);
  const std::string rec = serialize_pair(2.5, 2.0, 42, a, b);
  CHECK(rec.find("nonlinearity-counterexample") == 0);
  CHECK(rec.find("seed = 42") != std::string::npos);
  CHECK(rec.find("dim = 2") != std::string::npos);
}
