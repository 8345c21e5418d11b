#include "doctest.h"

#include <cmath>
#include <numbers>

#include "ncheat/algebra.hpp"
#include "ncheat/heat.hpp"
#include "ncheat/la/quadrature.hpp"
#include "ncheat/lp.hpp"
#include "test_support.hpp"

using namespace ncheat;
using testsup::small_cfg;

namespace {
constexpr double kPi = std::numbers::pi;

la::cplx weyl_phase(const ModelConfig& cfg, const Vec2& t, const Vec2& s) {
  // (t, theta s) with theta = h [[0,-1],[1,0]]
  const double pair = cfg.h * (-t[0] * s[1] + t[1] * s[0]);
  return std::exp(la::cplx(0.0, 0.5 * pair));
}

double block_frob_diff(const ModelConfig& cfg, const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (int i = 0; i < cfg.n; ++i)
    for (int j = 0; j < cfg.n; ++j) s += std::norm(a(i, j) - b(i, j));
  return std::sqrt(s);
}
}  // namespace

TEST_CASE("ladder matrices realize the Hermite recurrence") {
  ModelConfig cfg;
  cfg.n = 2;
  cfg.n_pad = 2;
  auto lm = ladder_matrices(cfg);
  CHECK(lm.q(0, 1).real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

  cfg.n = 16;
  cfg.n_pad = 24;
  lm = ladder_matrices(cfg);
  CHECK(la::max_abs_diff(lm.dq, Matrix(24, 24) - lm.dq.adjoint()) == 0.0);  // exactly antisymmetric

  // canonical commutator [Q, -i dq] = i on the non-edge block
  Matrix p(24, 24);
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 24; ++j) p(i, j) = la::cplx(0, -1) * lm.dq(i, j);
  Matrix comm = matmul(lm.q, p) - matmul(p, lm.q);
  for (int i = 0; i < 23; ++i)
    for (int j = 0; j < 23; ++j) {
      const la::cplx expect = (i == j) ? la::cplx(0, 1) : la::cplx(0, 0);
      CHECK(std::abs(comm(i, j) - expect) < 1e-12);
    }
}

TEST_CASE("weyl operator at zero is the identity") {
  const auto& cfg = small_cfg();
  Matrix w = weyl_operator(cfg, {0.0, 0.0});
  CHECK(la::max_abs_diff(w, Matrix::identity(cfg.n_pad)) < 1e-13);
}

TEST_CASE("weyl entry matches an independent oracle") {
  // entry (0,0) against a plain trapezoid quadrature of the kernel at h=1
  const auto& cfg = small_cfg();
  REQUIRE(cfg.h == 1.0);
  const Vec2 zeta{0.8, -1.3};
  Matrix w = weyl_operator(cfg, zeta);
  auto h0 = [](double s) { return std::pow(kPi, -0.25) * std::exp(-0.5 * s * s); };
  auto integrand = [&](double s) {
    return h0(s) * std::exp(la::cplx(0.0, zeta[1] * (s - 0.5 * zeta[0]))) * h0(s - zeta[0]);
  };
  const la::cplx oracle = testsup::trapezoid_oracle(integrand, 14.0, 6001);
  CHECK(std::abs(w(0, 0) - oracle) < 1e-10);
}

TEST_CASE("weyl relation holds on the working block") {
  // |t|, |s| up to 2 means the product displacement reaches ~4, so the
  // working block keeps a generous padding margin here.
  ModelConfig cfg;
  cfg.n = 16;
  cfg.n_pad = 64;
  const Vec2 ts[] = {{1.0, 0.3}, {-0.7, 1.4}, {2.0, -2.0}, {0.0, 1.0}};
  const Vec2 ss[] = {{0.4, -0.2}, {1.1, 0.8}, {-1.5, -0.6}};
  for (const auto& t : ts)
    for (const auto& s : ss) {
      Matrix lhs = matmul(weyl_operator(cfg, t), weyl_operator(cfg, s));
      Matrix rhs = weyl_operator(cfg, {t[0] + s[0], t[1] + s[1]});
      rhs *= weyl_phase(cfg, t, s);
      CHECK(block_frob_diff(cfg, lhs, rhs) < 1e-8);
    }
}

TEST_CASE("weyl relation holds for h away from 1") {
  ModelConfig cfg;
  cfg.n = 32;
  cfg.n_pad = 64;
  cfg.h = 2.5;
  const Vec2 t{0.9, -0.4}, s{-0.3, 1.2};
  Matrix lhs = matmul(weyl_operator(cfg, t), weyl_operator(cfg, s));
  Matrix rhs = weyl_operator(cfg, {t[0] + s[0], t[1] + s[1]});
  rhs *= weyl_phase(cfg, t, s);
  CHECK(block_frob_diff(cfg, lhs, rhs) < 1e-8);
}

TEST_CASE("translate matches the phase action on displacement operators") {
  // The displacement operator is a padded-model element; conjugating its
  // hard-truncated block would displace the cut edge instead. This test
  // fixes the orientation of the inner translation vector.
  const auto& cfg = small_cfg();
  const Vec2 s{0.6, -0.9};
  const Vec2 t{1.1, 0.5};
  Operator wt(weyl_operator(cfg, t));
  Operator moved = translate(cfg, s, wt);
  const la::cplx phase = std::exp(la::cplx(0.0, t[0] * s[0] + t[1] * s[1]));
  double diff = 0.0;
  for (int i = 0; i < cfg.n; ++i)
    for (int j = 0; j < cfg.n; ++j)
      diff = std::max(diff, std::abs(moved.mat(i, j) - phase * wt.mat(i, j)));
  CHECK(diff < 1e-8);
}

TEST_CASE("translate acts trivially at zero and preserves norms") {
  const auto& cfg = small_cfg();
  Operator g = gaussian_operator(cfg, 0.7);
  Operator g_blk(g.mat.block(cfg.n, cfg.n), true, true);

  Operator same = translate(cfg, {0.0, 0.0}, g_blk);
  CHECK(la::max_abs_diff(same.mat, g_blk.mat) < 1e-12);

  Operator moved = translate(cfg, {0.8, 0.4}, g_blk);
  for (double p : {1.0, 2.0, std::numeric_limits<double>::infinity()}) {
    CHECK(lp_norm(cfg, moved, p) ==
          doctest::Approx(lp_norm(cfg, g_blk, p)).epsilon(1e-8));
  }
}

TEST_CASE("translate is multiplicative and a *-map") {
  const auto& cfg = small_cfg();
  Operator g = gaussian_operator(cfg, 0.5);
  Operator x(g.mat.block(cfg.n, cfg.n), true, true);
  const Vec2 s{0.5, -0.3}, r{-0.2, 0.7};

  Operator one = translate(cfg, r, x);
  Operator two = translate(cfg, s, one);
  Operator direct = translate(cfg, {s[0] + r[0], s[1] + r[1]}, x);
  CHECK(block_frob_diff(cfg, two.mat.padded(cfg.n_pad, cfg.n_pad),
                        direct.mat.padded(cfg.n_pad, cfg.n_pad)) < 1e-8);

  Operator xa(x.mat.adjoint());
  Matrix lhs = translate(cfg, s, xa).mat;
  Matrix rhs = translate(cfg, s, x).mat.adjoint();
  CHECK(la::max_abs_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("trace calibration is stable and close to 2 pi h") {
  const auto& cfg = small_cfg();
  CHECK(cfg.c_tau == doctest::Approx(2.0 * kPi * cfg.h).epsilon(0.02));

  Operator g1 = gaussian_operator(cfg, 1.0);
  CHECK(tau(cfg, g1) == doctest::Approx(1.0).epsilon(1e-12));
  Operator g2 = gaussian_operator(cfg, 2.0);
  CHECK(tau(cfg, g2) == doctest::Approx(1.0).epsilon(0.01));
}

namespace {
// Quantization tests are cheap at a small padded dimension; the symbols
// used occupy only the lowest few modes.
const ModelConfig& quant_cfg() {
  static const ModelConfig c = [] {
    ModelConfig m;
    m.n = 16;
    m.n_pad = 32;
    return calibrate(m);
  }();
  return c;
}
}  // namespace

TEST_CASE("quantization is linear and reproduces the Gaussian operator") {
  const auto& cfg = quant_cfg();
  const double t = 0.8;
  auto fgauss = [&](double x, double y) {
    return la::cplx(std::exp(-t * (x * x + y * y)) / (4.0 * kPi * kPi), 0.0);
  };
  Operator viaLambda = lambda_theta(cfg, fgauss, 8.0);
  Operator direct = gaussian_operator(cfg, t);
  CHECK(la::max_abs_diff(viaLambda.mat, direct.mat) < 1e-8);

  auto zero = lambda_theta(cfg, [](double, double) { return la::cplx(0.0, 0.0); }, 4.0, 16);
  CHECK(zero.mat.max_abs() == 0.0);

  // linearity on two displaced Gaussians
  auto f1 = [](double x, double y) { return la::cplx(std::exp(-0.6 * (x * x + y * y)), 0.0); };
  auto f2 = [](double x, double y) {
    return la::cplx(std::exp(-0.9 * ((x - 0.4) * (x - 0.4) + y * y)), 0.0);
  };
  auto fsum = [&](double x, double y) { return 2.0 * f1(x, y) - 0.5 * f2(x, y); };
  Matrix viaSum = lambda_theta(cfg, fsum, 8.0).mat;
  Matrix viaParts = 2.0 * lambda_theta(cfg, f1, 8.0).mat - 0.5 * lambda_theta(cfg, f2, 8.0).mat;
  CHECK(la::max_abs_diff(viaSum, viaParts) < 1e-10);
}

TEST_CASE("quantization satisfies the Plancherel pairing") {
  // Under the trace normalization tau(lambda(f)) = (2 pi)^2 f(0) that the
  // calibration pins down, the quantized pairing carries the same (2 pi)^2
  // against the plain L2 pairing of the symbols.
  const auto& cfg = quant_cfg();
  auto f = [](double x, double y) { return la::cplx(std::exp(-0.7 * (x * x + y * y)), 0.0); };
  auto g = [](double x, double y) {
    return la::cplx(std::exp(-0.5 * ((x - 0.3) * (x - 0.3) + (y + 0.2) * (y + 0.2))), 0.0);
  };
  Operator lf = lambda_theta(cfg, f, 9.0);
  Operator lg = lambda_theta(cfg, g, 9.0);
  const double lhs = (cfg.c_tau * matmul(lf.mat.adjoint(), lg.mat).trace()).real();

  // L2 pairing of the symbols by tensor Gauss-Legendre
  const auto q = la::gauss_legendre_on(64, -9.0, 9.0);
  double rhs = 0.0;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j)
      rhs += q.w[i] * q.w[j] * (std::conj(f(q.x[i], q.x[j])) * g(q.x[i], q.x[j])).real();
  const double four_pi_sq = 4.0 * kPi * kPi;
  CHECK(lhs == doctest::Approx(four_pi_sq * rhs).epsilon(1e-3));
}

TEST_CASE("weyl operator rejects displacements that overflow the block") {
  ModelConfig cfg;
  cfg.n = 12;
  cfg.n_pad = 14;  // essentially no padding: large shifts must fail
  CHECK_THROWS_AS((void)weyl_operator(cfg, {6.0, 0.0}), LeakageExceeded);
}
