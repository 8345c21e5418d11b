#include "doctest.h"

#include <cmath>
#include <limits>

#include "ncheat/heat.hpp"
#include "ncheat/lp.hpp"
#include "ncheat/rng.hpp"
#include "test_support.hpp"

using namespace ncheat;
using testsup::small_cfg;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

Operator random_op(const ModelConfig& cfg, uint64_t seed) {
  Rng rng(seed);
  return Operator(rng.gaussian_matrix(cfg.n, cfg.n));
}
}  // namespace

TEST_CASE("singular profile sorts and weights") {
  const auto& cfg = small_cfg();
  Matrix d(cfg.n, cfg.n);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  d(2, 2) = 2.0;
  auto prof = singular_profile(cfg, Operator(d));
  CHECK(prof.values[0] == doctest::Approx(3.0));
  CHECK(prof.values[1] == doctest::Approx(2.0));
  CHECK(prof.values[2] == doctest::Approx(1.0));
  CHECK(prof.weight == cfg.c_tau);

  Operator zero(Matrix(cfg.n, cfg.n));
  auto zprof = singular_profile(cfg, zero);
  for (double v : zprof.values) CHECK(v == 0.0);
}

TEST_CASE("distribution function and mu are consistent step functions") {
  const auto& cfg = small_cfg();
  auto prof = singular_profile(cfg, random_op(cfg, 21));
  double prev = kInf;
  for (double s : {0.0, 0.2, 0.5, 1.0, 2.0, 5.0}) {
    const double ns = prof.n(s);
    CHECK(ns <= prev);  // decreasing in s
    prev = ns;
    // mu(n(s)) <= s at continuity points of the step function
    if (ns > 0.0 && std::abs(ns / prof.weight - std::round(ns / prof.weight)) < 1e-9) {
      CHECK(prof.mu(ns) <= s + 1e-12);
    }
  }
}

TEST_CASE("rank-one projector has norm c_tau^{1/p}") {
  const auto& cfg = small_cfg();
  Matrix p(cfg.n, cfg.n);
  p(0, 0) = 1.0;
  for (double e : {1.0, 1.5, 2.0, 3.0})
    CHECK(lp_norm(cfg, Operator(p), e) == doctest::Approx(std::pow(cfg.c_tau, 1.0 / e)).epsilon(1e-12));
  CHECK(lp_norm(cfg, Operator(p), kInf) == doctest::Approx(1.0));
}

TEST_CASE("gaussian operator has unit L1 norm") {
  const auto& cfg = small_cfg();
  Operator g = gaussian_operator(cfg, 1.0);
  CHECK(lp_norm(cfg, g, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("L2 norm squared equals the trace of x*x") {
  const auto& cfg = small_cfg();
  Operator x = random_op(cfg, 5);
  const double n2 = lp_norm(cfg, x, 2.0);
  const double tr = cfg.c_tau * matmul(x.mat.adjoint(), x.mat).trace().real();
  CHECK(n2 * n2 == doctest::Approx(tr).epsilon(1e-10));
}

TEST_CASE("invalid exponents are rejected") {
  const auto& cfg = small_cfg();
  CHECK_THROWS_AS((void)lp_norm(cfg, random_op(cfg, 2), 0.5), InvalidExponent);
  CHECK_THROWS_AS((void)holder_defect(cfg, random_op(cfg, 3), random_op(cfg, 4), 2, 2, 2),
                  ExponentMismatch);
}

TEST_CASE("holder inequality never fails on random pairs") {
  const auto& cfg = small_cfg();
  double scale_defect = -kInf;
  for (int trial = 0; trial < 60; ++trial) {
    Operator x = random_op(cfg, 100 + trial);
    Operator y = random_op(cfg, 300 + trial);
    const double d22 = holder_defect(cfg, x, y, 2, 2, 1);
    const double scale = lp_norm(cfg, x, 2.0) * lp_norm(cfg, y, 2.0);
    CHECK(d22 <= 1e-10 * scale);
    scale_defect = std::max(scale_defect, d22 / scale);

    Operator xp(matmul(x.mat.adjoint(), x.mat), true, true);
    Operator yp(matmul(y.mat.adjoint(), y.mat), true, true);
    const double d44 = holder_defect(cfg, xp, yp, 4, 4, 2);
    CHECK(d44 <= 1e-10 * lp_norm(cfg, xp, 4.0) * lp_norm(cfg, yp, 4.0));
  }
  // the bound is attained somewhere but not everywhere
  CHECK(scale_defect < 0.0);
}

TEST_CASE("unitary invariance and triangle inequality") {
  const auto& cfg = small_cfg();
  Rng rng(17);
  // random unitary from the QR-free route: exponentiate an anti-Hermitian
  Matrix h = la::hermitize(rng.gaussian_matrix(cfg.n, cfg.n));
  auto e = la::eigh(h);
  Matrix u(cfg.n, cfg.n);
  for (int k = 0; k < cfg.n; ++k)
    for (int i = 0; i < cfg.n; ++i)
      for (int j = 0; j < cfg.n; ++j)
        u(i, j) += std::exp(la::cplx(0.0, e.values[k])) * e.vectors(i, k) *
                   std::conj(e.vectors(j, k));

  Operator x = random_op(cfg, 9);
  Operator ux(matmul(u, matmul(x.mat, u.adjoint())));
  for (double p : {1.0, 2.0, 3.5, kInf})
    CHECK(lp_norm(cfg, ux, p) == doctest::Approx(lp_norm(cfg, x, p)).epsilon(1e-10));

  Operator y = random_op(cfg, 10);
  Operator xy(x.mat + y.mat);
  for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
    CHECK(lp_norm(cfg, xy, p) <=
          lp_norm(cfg, x, p) + lp_norm(cfg, y, p) + 1e-10 * lp_norm(cfg, x, p));
  }
}
