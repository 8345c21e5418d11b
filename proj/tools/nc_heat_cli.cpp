#include <clocale>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ncheat/algebra.hpp"
#include "ncheat/classical.hpp"
#include "ncheat/config.hpp"
#include "ncheat/convexity.hpp"
#include "ncheat/doi.hpp"
#include "ncheat/evolve.hpp"
#include "ncheat/heat.hpp"
#include "ncheat/lp.hpp"
#include "ncheat/rng.hpp"

namespace fs = std::filesystem;
using namespace ncheat;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 2;
constexpr int kExitInfra = 3;
constexpr double kInf = std::numeric_limits<double>::infinity();

int thread_budget() {
  const char* env = std::getenv("NC_HEAT_THREADS");
  if (!env) return static_cast<int>(std::thread::hardware_concurrency());
  const int v = std::atoi(env);
  return v <= 0 ? static_cast<int>(std::thread::hardware_concurrency()) : v;
}

struct Reporter {
  int passed = 0, failed = 0;
  std::ostringstream csv;

  bool check(const std::string& name, double value, double threshold, bool below = true) {
    const bool ok = below ? (value <= threshold) : (value >= threshold);
    (ok ? passed : failed)++;
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g,%s\n", name.c_str(), value, threshold,
                  ok ? "pass" : "FAIL");
    csv << buf;
    std::cout << (ok ? "  pass  " : "  FAIL  ") << name << "  value=" << value
              << (below ? "  <=  " : "  >=  ") << threshold << "\n";
    return ok;
  }
};

ModelConfig model_from_config(const Config& cfg) {
  ModelConfig m;
  m.n = cfg.get_int("model.n");
  m.n_pad = cfg.get_int("model.n_pad");
  m.h = cfg.get_double("model.h");
  m.quad_order = cfg.get_int("model.quad_order");
  m.tol_leak = cfg.get_double("model.tol_leak");
  m.validate();
  return m;
}

void write_output(RunManifest& man, const fs::path& out_dir, const std::string& name,
                  const std::string& body) {
  fs::create_directories(out_dir);
  const fs::path path = out_dir / name;
  std::ofstream f(path);
  f << body;
  man.outputs.emplace_back(path.string(), fnv1a(body));
}

void finish(RunManifest& man, const fs::path& out_dir) {
  man.finished_at = timestamp_now();
  fs::create_directories(out_dir);
  man.write((out_dir / "manifest.json").string());
}

// ---------------------------------------------------------------------------

int cmd_verify_doi(const Config& cfg, const fs::path& out, bool corrupt_phi) {
  RunManifest man;
  man.subcommand = "verify-doi";
  man.version = kVersion;
  man.started_at = timestamp_now();
  man.config_snapshot = cfg.entries();
  man.master_seed = cfg.get_u64("doi.seed");

  const auto p_list = cfg.get_list("doi.p_list");
  const auto q_list = cfg.get_list("doi.q_list");
  const int trials = cfg.get_int("doi.trials");
  const int dim = cfg.get_int("doi.dim");

  if (corrupt_phi) {
    // Negative control: force the symbol to 10p on the diagonal band of the
    // joint spectrum; the exact identity must break visibly.
    Rng rng(man.master_seed);
    Matrix a = rng.random_positive(dim);
    Matrix b = rng.random_positive(dim);
    const double p = 3.0;
    PhiKernel k{p};
    Matrix diff = a - b;
    Matrix rhs = matmul(matrix_power(a, p - 1.0), diff) + matmul(diff, matrix_power(b, p - 1.0));
    auto pair = make_spectral_pair(a, b);
    Matrix recon = doi_apply(
        pair,
        [&](double l, double m) {
          const double v = phi_value(k, l, m);
          return std::abs(l - m) < 0.25 * (l + m) ? 10.0 * p : v;
        },
        rhs);
    Matrix lhs = matrix_power(a, p) - matrix_power(b, p);
    const double resid = (recon - lhs).frobenius() / std::max(lhs.frobenius(), 1e-300);
    std::cout << "corrupt-phi identity residual = " << resid << "\n";
    finish(man, out);
    return resid > 1e-6 ? kExitViolation : kExitOk;
  }

  Reporter rep;
  std::ostringstream csv;
  csv << "p,q,trials,c_p,max_identity_residual,max_transformer_ratio,max_product_ratio,"
         "max_absvalue_ratio\n";
  int status = kExitOk;
  std::string counterexample;
  for (double p : p_list) {
    for (double q : q_list) {
      try {
        auto r = verify_nonlinearity(p, q, trials, dim, man.master_seed);
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%d,%.12g,%.12g,%.12g,%.12g,%.12g\n", p, q,
                      trials, r.c_p, r.max_identity_residual, r.max_transformer_ratio,
                      r.max_product_ratio, r.max_absvalue_ratio);
        csv << buf;
        rep.check("identity residual p=" + std::to_string(p) + " q=" + std::to_string(q),
                  r.max_identity_residual, 1e-10);
        rep.check("transformer ratio p=" + std::to_string(p) + " q=" + std::to_string(q),
                  r.max_transformer_ratio, r.c_p * (1.0 + 1e-9));
      } catch (const BoundViolated& e) {
        std::cout << "  FAIL  " << e.what() << "\n";
        counterexample = e.record;
        ++rep.failed;
        status = kExitViolation;
      }
    }
  }
  if (!counterexample.empty()) write_output(man, out, "doi_counterexample.txt", counterexample);
  write_output(man, out, "doi_report.csv", csv.str());
  man.suites.push_back({"verify-doi", rep.passed, rep.failed});
  finish(man, out);
  if (rep.failed > 0) status = kExitViolation;
  return status;
}

// ---------------------------------------------------------------------------

int cmd_heat_check(const Config& cfg, const fs::path& out) {
  RunManifest man;
  man.subcommand = "heat-check";
  man.version = kVersion;
  man.started_at = timestamp_now();
  man.config_snapshot = cfg.entries();

  Reporter rep;
  ModelConfig mc = model_from_config(cfg);
  ChannelCache cache(6);
  try {
    mc = calibrate(mc);
    std::cout << "calibrated c_tau = " << mc.c_tau << "\n";
  } catch (const std::exception& e) {
    std::cout << "  FAIL  calibration: " << e.what() << "\n";
    man.suites.push_back({"heat-check", 0, 1});
    finish(man, out);
    return kExitViolation;
  }

  try {
    for (double t : {0.25, 1.0, 4.0})
      rep.check("gaussian min eig t=" + std::to_string(t),
                la::min_eigenvalue(gaussian_operator(mc, t).mat), -1e-10, /*below=*/false);
    for (double t : {0.5, 2.0})
      rep.check("gaussian trace t=" + std::to_string(t),
                std::abs(tau(mc, gaussian_operator(mc, t)) - 1.0), 0.01);

    // semigroup: one channel step against the closed gaussian family
    Operator g_half(gaussian_operator(mc, 0.5).mat.block(mc.n, mc.n), true, true);
    Operator g_one = gaussian_operator(mc, 1.0);
    Operator stepped = heat_apply(mc, 0.5, g_half, cache, LeakPolicy::kStrict, nullptr,
                                  cfg.get_double("heat.dt_max"));
    rep.check("semigroup residual",
              (stepped.mat - g_one.mat.block(mc.n, mc.n)).frobenius() /
                  g_one.mat.block(mc.n, mc.n).frobenius(),
              1e-4);

    Operator u = g_half;
    Operator hu = heat_apply(mc, 0.5, u, cache, LeakPolicy::kStrict, nullptr,
                             cfg.get_double("heat.dt_max"));
    rep.check("trace preservation", std::abs(tau(mc, hu) / tau(mc, u) - 1.0), 1e-6);
    rep.check("positivity of heat image", la::min_eigenvalue(hu.mat),
              -1e-10 * lp_norm(mc, u, kInf), false);
    for (double p : {1.0, 2.0, kInf})
      rep.check("contraction p=" + std::to_string(p), lp_norm(mc, hu, p) - lp_norm(mc, u, p),
                1e-8);
    const double t = 0.5;
    auto smoothing = [&](double pn, double qn) {
      const double rinv = 1.0 / pn - (std::isinf(qn) ? 0.0 : 1.0 / qn);
      return std::pow(4.0 * std::numbers::pi * t, -rinv) * lp_norm(mc, u, pn) + 1e-8;
    };
    rep.check("smoothing (1,inf)", lp_norm(mc, hu, kInf), smoothing(1.0, kInf));
    rep.check("smoothing (1,2)", lp_norm(mc, hu, 2.0), smoothing(1.0, 2.0));
    rep.check("smoothing (2,inf)", lp_norm(mc, hu, kInf), smoothing(2.0, kInf));

    // operator Jensen through the heat channel (padded dimension)
    auto ch = cache.get(mc, 0.3);
    Matrix gfull = gaussian_operator(mc, 1.0).mat;
    Matrix gap = ch->apply_padded(matrix_power(gfull, 1.5)) -
                 matrix_power(ch->apply_padded(gfull), 1.5);
    rep.check("heat channel jensen gap", la::min_eigenvalue(gap), -1e-8, false);

    // scaled sup functional (reduced node count: it only reads the sup
    // norm). The trend is compared against the closed thermal value at the
    // end of the grid, which separates flow accuracy from grid extent.
    ModelConfig tb = mc;
    tb.quad_order = std::max(12, mc.quad_order * 3 / 5);
    const double t_max = cfg.get_double("heat.tauberian_t_max");
    auto grid = log_grid(cfg.get_double("heat.tauberian_t_min"), t_max,
                         cfg.get_int("heat.tauberian_points"));
    auto tbrep = tauberian_functional(tb, gaussian_operator(mc, 1.0), grid, cache);
    const double target = 4.0 * t_max / (4.0 * (t_max + 1.0) + mc.h);
    rep.check("tauberian trend vs thermal value", std::abs(tbrep.trend - target), 0.02 * target);
    rep.check("tauberian sup dominates L1", lp_norm(mc, gaussian_operator(mc, 1.0), 1.0),
              tbrep.sup_value + 0.05 * tbrep.tau_u);
  } catch (const std::exception& e) {
    std::cout << "  FAIL  heat-check aborted: " << e.what() << "\n";
    ++rep.failed;
  }

  write_output(man, out, "heat_report.csv", "name,value,threshold,status\n" + rep.csv.str());
  man.suites.push_back({"heat-check", rep.passed, rep.failed});
  finish(man, out);
  return rep.failed == 0 ? kExitOk : kExitViolation;
}

// ---------------------------------------------------------------------------

int cmd_jensen_check(const Config& cfg, const fs::path& out) {
  RunManifest man;
  man.subcommand = "jensen-check";
  man.version = kVersion;
  man.started_at = timestamp_now();
  man.config_snapshot = cfg.entries();
  man.master_seed = cfg.get_u64("jensen.seed");

  Reporter rep;
  const int trials = cfg.get_int("jensen.trials");
  const int dim = cfg.get_int("jensen.dim");
  const int n_kraus = cfg.get_int("jensen.n_kraus");

  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const uint64_t seed = Rng::derive(man.master_seed, trial);
    auto phi = random_unital_cp(dim, n_kraus, seed);
    Rng rng(seed ^ 0x5a5a5a5a);
    Matrix u = rng.random_positive(dim);
    const double p = 1.0 + rng.uniform();
    const double scale = std::pow(la::eigh(u).values.back(), p);
    worst = std::min(worst, jensen_gap(phi, u, p) / scale);
  }
  rep.check("random unital CP jensen gap (scaled)", worst, -1e-8, false);

  // heat channels
  ModelConfig mc;
  mc.n = cfg.get_int("jensen.heat_n");
  mc.n_pad = cfg.get_int("jensen.heat_n_pad");
  mc.h = cfg.get_double("model.h");
  mc = calibrate(mc);
  ChannelCache cache(4);
  Matrix g1 = gaussian_operator(mc, 1.0).mat;
  for (double t : cfg.get_list("jensen.heat_t_list")) {
    auto ch = cache.get(mc, t);
    for (double p : {1.25, 1.5, 2.0}) {
      Matrix gap = ch->apply_padded(matrix_power(g1, p)) -
                   matrix_power(ch->apply_padded(g1), p);
      rep.check("heat jensen gap t=" + std::to_string(t) + " p=" + std::to_string(p),
                la::min_eigenvalue(gap), -1e-8, false);
    }
  }

  // outside the window the inequality must fail: find and archive a witness
  bool found = false;
  for (uint64_t seed = 0; seed < 500 && !found; ++seed) {
    auto phi = random_unital_cp(3, 2, seed);
    Rng rng(seed ^ 0xabcdef);
    Matrix u = rng.random_positive(3);
    Matrix gap = phi.apply(matrix_power(u, 3.0)) - matrix_power(phi.apply(u), 3.0);
    const double g = la::min_eigenvalue(gap);
    if (g < -1e-4) {
      found = true;
      std::cout << "  p=3 violation found at seed " << seed << " gap " << g << "\n";
      write_output(man, out, "jensen_counterexample.txt",
                   serialize_jensen_case(phi, u, 3.0, seed));
    }
  }
  rep.check("p=3 counterexample found", found ? 1.0 : 0.0, 1.0, false);

  write_output(man, out, "jensen_report.csv", "name,value,threshold,status\n" + rep.csv.str());
  man.suites.push_back({"jensen-check", rep.passed, rep.failed});
  finish(man, out);
  return rep.failed == 0 ? kExitOk : kExitViolation;
}

// ---------------------------------------------------------------------------

struct SweepPlan {
  std::string model;
  std::vector<double> p_grid, amplitude_grid, cert_fracs;
  double horizon = 0.0, t0 = 0.0;
  int d = 0;
  double box = 0.0;
  int n = 0;
};

SweepPlan resolve_sweep_plan(const Config& cfg) {
  SweepPlan plan;
  plan.model = cfg.get_string("sweep.model");
  const std::string pre = plan.model;
  if (plan.model != "matrix2" && plan.model != "classical-d1" && plan.model != "classical-d2" &&
      plan.model != "classical-d3")
    throw Error("fujita-sweep: unknown model '" + plan.model + "'");
  // An unset key falls back to the per-model default; an explicitly empty
  // value (e.g. ",") means an empty grid.
  auto pick_list = [&](const std::string& key, const std::string& fallback) {
    if (cfg.get_string(key).empty()) return cfg.get_list(pre + fallback);
    return cfg.get_list(key);
  };
  plan.p_grid = pick_list("sweep.p_grid", ".p_grid");
  plan.amplitude_grid = pick_list("sweep.amplitude_grid", ".amplitude_grid");
  plan.cert_fracs = pick_list("sweep.cert_fracs", ".cert_fracs");
  plan.horizon = cfg.get_double("sweep.horizon");
  if (plan.horizon <= 0.0) plan.horizon = cfg.get_double(pre + ".horizon");
  plan.t0 = cfg.get_double("sweep.t0");
  if (plan.t0 <= 0.0) plan.t0 = cfg.get_double(pre + ".t0");
  if (plan.model != "matrix2") {
    plan.d = plan.model.back() - '0';
    plan.box = cfg.get_double(pre + ".box");
    plan.n = cfg.get_int(pre + ".n");
  }
  return plan;
}

ClassifyThresholds thresholds_from_config(const Config& cfg, const SweepPlan& plan) {
  ClassifyThresholds th;
  th.ceiling_factor = cfg.get_double("sweep.ceiling_factor");
  th.dt0 = cfg.get_double("sweep.dt0");
  th.dt_max = cfg.get_double("sweep.dt_max");
  th.q_override = cfg.get_double("sweep.q_override");
  th.decay_slope_tol = cfg.get_double("sweep.decay_slope_tol");
  th.cert_grid_points = cfg.get_int("sweep.cert_grid_points");
  th.dt_safety = cfg.get_double("sweep.dt_safety");
  th.cert_fracs = plan.cert_fracs;
  return th;
}

std::string bracket_summary(const std::vector<SweepRecord>& recs) {
  if (recs.empty()) return "bracket: no cells\n";
  double a_min = kInf;
  for (const auto& r : recs) a_min = std::min(a_min, r.amplitude);
  double lo = -kInf, hi = kInf, p_min = kInf, p_max = -kInf;
  for (const auto& r : recs) {
    if (r.amplitude != a_min) continue;
    p_min = std::min(p_min, r.p);
    p_max = std::max(p_max, r.p);
    if (r.outcome == Outcome::kBlowUp) lo = std::max(lo, r.p);
    if (r.outcome == Outcome::kGlobalCandidate) hi = std::min(hi, r.p);
  }
  std::ostringstream os;
  os << "blow-up boundary bracket at amplitude " << a_min << ": ["
     << (std::isfinite(lo) ? lo : p_min) << ", " << (std::isfinite(hi) ? hi : p_max) << "]"
     << (std::isfinite(lo) && std::isfinite(hi) ? "" : " (one-sided)") << "\n";
  return os.str();
}

int cmd_fujita_sweep(const Config& cfg, const fs::path& out) {
  RunManifest man;
  man.subcommand = "fujita-sweep";
  man.version = kVersion;
  man.started_at = timestamp_now();
  man.config_snapshot = cfg.entries();
  man.master_seed = cfg.get_u64("sweep.seed");

  SweepPlan plan = resolve_sweep_plan(cfg);
  ClassifyThresholds th = thresholds_from_config(cfg, plan);
  const int threads = thread_budget();

  std::vector<SweepRecord> recs;
  const bool classical = plan.model != "matrix2";
  if (classical) {
    recs = fujita_sweep_classical(plan.d, plan.box, plan.n, plan.p_grid, plan.amplitude_grid,
                                  plan.horizon, man.master_seed, th, threads, plan.t0);
  } else {
    ModelConfig mc = calibrate(model_from_config(cfg));
    recs = fujita_sweep(mc, plan.p_grid, plan.amplitude_grid, plan.horizon, man.master_seed, th,
                        threads);
  }

  std::ostringstream csv;
  csv << sweep_csv_header(classical);
  for (const auto& r : recs) csv << sweep_csv_row(r, classical);
  write_output(man, out, "sweep_" + plan.model + ".csv", csv.str());

  const std::string summary = bracket_summary(recs);
  std::cout << summary;
  for (const auto& r : recs) {
    std::cout << "  p=" << r.p << " A=" << r.amplitude << " -> " << outcome_name(r.outcome);
    if (!r.reason.empty()) std::cout << "  (" << r.reason << ")";
    std::cout << "\n";
  }
  write_output(man, out, "sweep_" + plan.model + "_summary.txt", summary);
  man.suites.push_back({"fujita-sweep", static_cast<int>(recs.size()), 0});
  finish(man, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_certify(const Config& cfg, const fs::path& out) {
  RunManifest man;
  man.subcommand = "certify";
  man.version = kVersion;
  man.started_at = timestamp_now();
  man.config_snapshot = cfg.entries();

  const std::string model = cfg.get_string("certify.model");
  const double p = cfg.get_double("certify.p");
  const double amplitude = cfg.get_double("certify.amplitude");
  const double t0 = cfg.get_double("certify.t0");
  auto grid = log_grid(cfg.get_double("certify.t_min"), cfg.get_double("certify.t_max"),
                       cfg.get_int("certify.points"));

  CertificateReport rep;
  if (model == "matrix2") {
    ModelConfig mc = calibrate(model_from_config(cfg));
    ChannelCache cache(4);
    Operator base = gaussian_operator(mc, t0);
    Operator u0(amplitude * base.mat.block(mc.n, mc.n), true, true);
    rep = blowup_certificate(mc, u0, p, grid, cache);
  } else if (model.rfind("classical-d", 0) == 0) {
    const int d = model.back() - '0';
    const std::string pre = "classical-d" + std::to_string(d);
    GridField u0 = gaussian_bump(d, cfg.get_double(pre + ".box"), cfg.get_int(pre + ".n"),
                                 amplitude, t0);
    rep = blowup_certificate_classical(u0, p, grid);
  } else {
    throw Error("certify: unknown model '" + model + "'");
  }

  std::ostringstream csv;
  csv << "t,functional,threshold\n";
  for (auto& [t, v] : rep.curve) {
    char buf[100];
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g\n", t, v, rep.threshold);
    csv << buf;
  }
  write_output(man, out, "certify.csv", csv.str());

  std::cout << "threshold (p-1)^(-1/(p-1)) = " << rep.threshold << "\n";
  std::cout << "margin = " << rep.margin << (rep.advisory ? "  (advisory: p outside (1,2))" : "")
            << "\n";
  if (rep.violated_at)
    std::cout << "certificate fires at t = " << *rep.violated_at
              << ": no nonnegative supersolution spans this window\n";
  else
    std::cout << "certificate silent on this grid\n";
  man.suites.push_back({"certify", 1, 0});
  finish(man, out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_NUMERIC, "C");
  CLI::App app{"nc-heat: numerical laboratory for the heat flow on the quantum plane"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::vector<std::string> overrides;
  bool corrupt_phi = false;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out", out_dir, "output directory (default: out)");
  app.add_option("--set", overrides, "override a config key, e.g. --set model.n=32");

  auto* doi_cmd = app.add_subcommand("verify-doi", "randomized power-difference bound checks");
  doi_cmd->add_flag("--corrupt-phi", corrupt_phi, "negative control: corrupt the symbol diagonal");
  auto* heat_cmd = app.add_subcommand("heat-check", "heat kernel / channel invariant suite");
  auto* jensen_cmd = app.add_subcommand("jensen-check", "operator Jensen inequality suite");
  auto* sweep_cmd = app.add_subcommand("fujita-sweep", "blow-up / global-existence sweep");
  auto* certify_cmd = app.add_subcommand("certify", "blow-up certificate for given data");

  CLI11_PARSE(app, argc, argv);

  try {
    Config cfg;
    if (!config_path.empty()) cfg.load_file(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error("--set expects key=value");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    const fs::path out(out_dir);
    if (doi_cmd->parsed()) return cmd_verify_doi(cfg, out, corrupt_phi);
    if (heat_cmd->parsed()) return cmd_heat_check(cfg, out);
    if (jensen_cmd->parsed()) return cmd_jensen_check(cfg, out);
    if (sweep_cmd->parsed()) return cmd_fujita_sweep(cfg, out);
    if (certify_cmd->parsed()) return cmd_certify(cfg, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfra;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitInfra;
  }
  return kExitOk;
}
