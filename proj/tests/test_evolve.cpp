#include "doctest.h"

#include <cmath>
#include <numbers>

#include "ncheat/algebra.hpp"
#include "ncheat/evolve.hpp"
#include "ncheat/lp.hpp"
#include "test_support.hpp"

using namespace ncheat;
using testsup::cache;

namespace {

const ModelConfig& tiny_cfg() {
  static const ModelConfig c = [] {
    ModelConfig m;
    m.n = 24;
    m.n_pad = 48;
    m.quad_order = 16;
    return calibrate(m);
  }();
  return c;
}

Operator gaussian_data(const ModelConfig& cfg, double amplitude, double t0) {
  Operator g = gaussian_operator(cfg, t0);
  return Operator(amplitude * g.mat.block(cfg.n, cfg.n), true, true);
}

}  // namespace

TEST_CASE("fujita parameter algebra at the reference point") {
  auto fp = fujita_params(2, 3.0, 4.0);
  CHECK(fp.r == doctest::Approx(2.0));
  CHECK(fp.beta == doctest::Approx(0.25));
  CHECK(fp.p * fp.beta == doctest::Approx(0.75));
  CHECK(0.5 * fp.d * (fp.p - 1.0) / fp.q + (fp.p - 1.0) * fp.beta == doctest::Approx(1.0));
  // Gamma(1/2) Gamma(1/4) / Gamma(3/4)
  CHECK(fp.gamma_factor == doctest::Approx(5.2441151086).epsilon(1e-6));
  CHECK(fp.c_beta == doctest::Approx(std::pow(4.0 * std::numbers::pi, -0.5)).epsilon(1e-12));

  // default q is the midpoint of (max(p,r), p r) = (3, 6)
  auto mid = fujita_params(2, 3.0);
  CHECK(mid.q == doctest::Approx(4.5));

  CHECK_THROWS_AS((void)fujita_params(2, 2.0), NoAdmissibleQ);
  CHECK_THROWS_AS((void)fujita_params(2, 3.0, 6.5), NoAdmissibleQ);

  // d = 1, p = 4: interval (4, 6)
  auto d1 = fujita_params(1, 4.0);
  CHECK(d1.q == doctest::Approx(5.0));
  CHECK(d1.p * d1.beta < 1.0);
  CHECK(d1.beta > 0.0);
}

TEST_CASE("smallness threshold solves the fixed-point inequality") {
  auto fp = fujita_params(2, 3.0, 4.0);
  const double cg = fp.c_beta * fp.gamma_factor;
  // alpha = 0: closed form M = (1/cg)^{1/(p-1)}
  CHECK(fp.m_max(0.0) == doctest::Approx(std::pow(1.0 / cg, 0.5)).epsilon(1e-9));
  const double m1 = fp.m_max(0.1);
  CHECK(0.1 + cg * std::pow(m1, 3.0) == doctest::Approx(m1).epsilon(1e-9));
  // infeasible when alpha is too large
  CHECK(fp.m_max(10.0) == 0.0);
}

TEST_CASE("linear mode reproduces the heat flow") {
  const auto& cfg = tiny_cfg();
  Operator u0 = gaussian_data(cfg, 1.0, 0.5);
  EvolutionState st;
  st.u = u0;
  st.scheme = Scheme::kExpEuler;
  auto next = duhamel_step(cfg, st, 0.3, 2.0, cache(), 1e9, /*coeff=*/0.0);
  Operator direct = heat_apply(cfg, 0.3, u0, cache());
  CHECK(la::max_abs_diff(next.u.mat, direct.mat) < 1e-13);

  st.scheme = Scheme::kMidpoint;
  auto mid = duhamel_step(cfg, st, 0.3, 2.0, cache(), 1e9, /*coeff=*/0.0);
  CHECK(la::max_abs_diff(mid.u.mat, direct.mat) < 1e-5);
}

TEST_CASE("step halving shows the scheme orders") {
  const auto& cfg = tiny_cfg();
  Operator u0 = gaussian_data(cfg, 0.8, 0.5);
  const double p = 2.0, T = 0.32;

  auto run = [&](Scheme scheme, double dt) {
    EvolutionState st;
    st.u = u0;
    st.scheme = scheme;
    while (st.t < T - 1e-12) st = duhamel_step(cfg, st, dt, p, cache(), 1e9);
    return st.u;
  };
  for (Scheme scheme : {Scheme::kExpEuler, Scheme::kMidpoint}) {
    Operator ref = run(scheme, T / 32.0);
    const double e1 = (run(scheme, T / 4.0).mat - ref.mat).frobenius();
    const double e2 = (run(scheme, T / 8.0).mat - ref.mat).frobenius();
    const double order = std::log2(e1 / e2);
    if (scheme == Scheme::kExpEuler) CHECK(order >= 0.8);
    else CHECK(order >= 1.6);
  }
}

TEST_CASE("positivity and mass monotonicity along the flow") {
  const auto& cfg = tiny_cfg();
  Operator u0 = gaussian_data(cfg, 0.6, 0.5);
  EvolutionState st;
  st.u = u0;
  st.scheme = Scheme::kMidpoint;
  const double tau0 = tau(cfg, u0);
  double prev_mass = tau0;
  for (int k = 0; k < 100; ++k) {
    st = duhamel_step(cfg, st, 0.02, 1.5, cache(), 1e9);
    const double sup = lp_norm(cfg, st.u, std::numeric_limits<double>::infinity());
    CHECK(la::min_eigenvalue(st.u.mat) >= -1e-9 * sup);
    const double mass = tau(cfg, st.u);
    CHECK(mass >= prev_mass - 1e-9 * tau0);  // heat conserves, the source adds
    prev_mass = mass;
  }
  CHECK(prev_mass > tau0);
}

TEST_CASE("picard iteration contracts on the guaranteed window") {
  const auto& cfg = tiny_cfg();
  Operator u0 = gaussian_data(cfg, 0.5, 0.5);
  const double p = 1.5, q = 2.0, tol = 1e-6;
  auto res = picard_window(cfg, u0, q, p, tol, cache(), 16);
  CHECK(res.window > 0.0);
  CHECK(res.worst_ratio < 1.0);
  // the a-priori contraction factor on this window is 1/2
  CHECK(res.worst_ratio < 0.75);
  CHECK(res.diffs.back() < tol);

  // independent stepper agrees at the endpoint
  EvolutionState st;
  st.u = u0;
  st.scheme = Scheme::kMidpoint;
  const double dt = res.window / 16.0;
  while (st.t < res.window - 1e-12) st = duhamel_step(cfg, st, dt, p, cache(), 1e9);
  auto prof_diff = Operator(st.u.mat - res.trajectory.back().mat);
  const double d = lp_norm(cfg, prof_diff, q) +
                   lp_norm(cfg, prof_diff, std::numeric_limits<double>::infinity());
  CHECK(d < 5.0 * tol);
}

TEST_CASE("picard on zero data returns the zero trajectory") {
  const auto& cfg = tiny_cfg();
  Operator zero(Matrix(cfg.n, cfg.n), true, true);
  auto res = picard_window(cfg, zero, 2.0, 1.5, 1e-8, cache());
  for (const auto& u : res.trajectory) CHECK(u.mat.max_abs() == 0.0);
}

TEST_CASE("certificate thresholds and scaling") {
  const auto& cfg = tiny_cfg();
  CHECK(std::pow(2.0 - 1.0, -1.0 / (2.0 - 1.0)) == doctest::Approx(1.0));
  CHECK(std::pow(1.5 - 1.0, -1.0 / (1.5 - 1.0)) == doctest::Approx(4.0));

  Operator small = gaussian_data(cfg, 0.5, 0.5);
  auto grid = log_grid(0.2, 6.0, 10);
  auto rep_small = blowup_certificate(cfg, small, 1.5, grid, cache());
  CHECK(rep_small.threshold == doctest::Approx(4.0));
  CHECK(rep_small.margin < 0.0);

  // functional is linear in the data: doubling shifts every curve point by 2x
  Operator doubled(2.0 * small.mat, true, true);
  auto rep_double = blowup_certificate(cfg, doubled, 1.5, grid, cache());
  for (size_t i = 0; i < grid.size(); ++i)
    CHECK(rep_double.curve[i].second ==
          doctest::Approx(2.0 * rep_small.curve[i].second).epsilon(1e-9));

  // large amplitude crosses the threshold within the window
  Operator huge(400.0 * small.mat, true, true);
  auto rep_huge = blowup_certificate(cfg, huge, 1.5, grid, cache());
  CHECK(rep_huge.margin > 0.0);
  CHECK(rep_huge.violated_at.has_value());

  // windowed monitor at s1 = 0 reduces to the plain certificate
  auto mons = windowed_certificates(cfg, {{0.0, huge}}, 1.5, 6.0, 10, cache());
  REQUIRE(mons.size() == 1);
  CHECK(mons[0].cert.margin == doctest::Approx(rep_huge.margin).epsilon(0.2));
}

TEST_CASE("sweep records round-trip through the CSV schema") {
  SweepRecord r;
  r.p = 2.5;
  r.amplitude = 0.125;
  r.outcome = Outcome::kGlobalCandidate;
  r.t_detect = std::numeric_limits<double>::quiet_NaN();
  r.max_uinf = 0.0123456789;
  r.cert_margin = -3.875;
  r.beta = 0.25;
  r.q = 4.0;
  r.r = 1.5;
  r.decay_fit = 0.71;
  r.dt_final = 0.0125;
  r.cell_seed = 1234567890123ull;
  for (bool classical : {false, true}) {
    if (classical) {
      r.grid_d = 2;
      r.grid_box = 256.0;
      r.grid_n = 512;
    }
    const std::string row = sweep_csv_row(r, classical);
    SweepRecord back = sweep_csv_parse_row(row, classical);
    CHECK(back.p == r.p);
    CHECK(back.amplitude == r.amplitude);
    CHECK(back.outcome == r.outcome);
    CHECK(std::isnan(back.t_detect));
    CHECK(back.max_uinf == doctest::Approx(r.max_uinf).epsilon(1e-11));
    CHECK(back.cert_margin == r.cert_margin);
    CHECK(back.cell_seed == r.cell_seed);
    if (classical) {
      CHECK(back.grid_d == 2);
      CHECK(back.grid_n == 512);
    }
  }
  CHECK(sweep_csv_header(false) ==
        "p,amplitude,outcome,t_detect,max_uinf,lemma61_margin,beta,q,r,decay_fit,dt_final,"
        "cell_seed\n");
}

TEST_CASE("decay fit recovers power laws") {
  std::vector<std::pair<double, double>> curve;
  for (double t = 0.5; t < 60.0; t *= 1.3) curve.emplace_back(t, 3.0 * std::pow(t, -0.75));
  CHECK(fit_decay_exponent(curve, 1.0, 60.0) == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("classifier labels a decaying matrix cell as a global candidate") {
  const auto& cfg = tiny_cfg();
  ClassifyThresholds th;
  th.dt0 = 0.1;
  th.cert_fracs = {0.0};
  // small data above the Fujita exponent inside a short horizon
  auto rec = classify_cell(cfg, GaussianData{0.05, 0.5}, 3.0, 8.0, th, 99, cache());
  CHECK(rec.outcome == Outcome::kGlobalCandidate);
  CHECK(rec.beta == doctest::Approx(fujita_params(2, 3.0).beta));
  CHECK(std::isnan(rec.t_detect));
  CHECK(rec.decay_fit > rec.beta - th.decay_slope_tol);

  // large subcritical data blows up quickly
  auto rec2 = classify_cell(cfg, GaussianData{30.0, 0.5}, 1.5, 8.0, th, 99, cache());
  CHECK(rec2.outcome == Outcome::kBlowUp);
  CHECK(std::isfinite(rec2.t_detect));
  CHECK(rec2.cert_margin > 0.0);
}
