#include "ncheat/evolve.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "ncheat/algebra.hpp"
#include "ncheat/doi.hpp"
#include "ncheat/lp.hpp"
#include "ncheat/rng.hpp"

namespace ncheat {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = std::numbers::pi;
}  // namespace

double FujitaParams::m_max(double alpha) const {
  const double cg = c_beta * gamma_factor;
  // g(M) = alpha + cg M^p - M; feasible iff g at the stationary point <= 0.
  const double m_star = std::pow(1.0 / (cg * p), 1.0 / (p - 1.0));
  auto g = [&](double m) { return alpha + cg * std::pow(m, p) - m; };
  if (g(m_star) > 0.0) return 0.0;
  double lo = m_star, hi = m_star;
  while (g(hi) <= 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) <= 0.0 ? lo : hi) = mid;
  }
  return lo;
}

FujitaParams fujita_params(int d, double p, double q) {
  if (d < 1) throw Error("fujita_params: d must be >= 1");
  FujitaParams fp;
  fp.d = d;
  fp.p = p;
  fp.p_fujita = 1.0 + 2.0 / d;
  fp.r = 0.5 * d * (p - 1.0);
  const double q_lo = std::max(p, fp.r);
  const double q_hi = p * fp.r;
  if (!(q_hi > q_lo))
    throw NoAdmissibleQ("fujita_params: no admissible q at d=" + std::to_string(d) +
                        ", p=" + std::to_string(p) + " (p <= 1 + 2/d)");
  if (!(q > q_lo && q < q_hi))
    throw NoAdmissibleQ("fujita_params: q outside the admissible interval (" +
                        std::to_string(q_lo) + ", " + std::to_string(q_hi) + ")");
  fp.q = q;
  fp.beta = 0.5 * d * (1.0 / fp.r - 1.0 / q);
  // Exact invariants of the construction.
  const double pb = p * fp.beta;
  const double ident = 0.5 * d * (p - 1.0) / q + (p - 1.0) * fp.beta;
  if (!(pb > 0.0 && pb < 1.0) || std::abs(ident - 1.0) > 1e-12)
    throw NoAdmissibleQ("fujita_params: invariant violation at q=" + std::to_string(q));
  fp.c_beta = std::pow(4.0 * kPi, -0.5 * d * (p - 1.0) / q);
  fp.gamma_factor =
      std::tgamma((p - 1.0) * fp.beta) * std::tgamma(1.0 - pb) / std::tgamma(1.0 - fp.beta);
  return fp;
}

FujitaParams fujita_params(int d, double p) {
  const double r = 0.5 * d * (p - 1.0);
  const double q_lo = std::max(p, r);
  const double q_hi = p * r;
  if (!(q_hi > q_lo))
    throw NoAdmissibleQ("fujita_params: no admissible q at d=" + std::to_string(d) +
                        ", p=" + std::to_string(p) + " (p <= 1 + 2/d)");
  return fujita_params(d, p, 0.5 * (q_lo + q_hi));
}

namespace {

Operator positive_power(const Operator& u, double p) {
  return Operator(matrix_power(u.mat, p), true, true);
}

double sup_eig(const Operator& u) {
  auto e = la::eigh(u.mat);
  return std::max(std::abs(e.values.front()), std::abs(e.values.back()));
}

}  // namespace

EvolutionState duhamel_step(const ModelConfig& cfg, const EvolutionState& st, double dt, double p,
                            ChannelCache& cache, double ceiling, double coeff) {
  if (dt <= 0.0) throw Error("duhamel_step: dt must be positive");
  EvolutionState next = st;
  next.dt = dt;

  if (st.scheme == Scheme::kExpEuler) {
    Operator w = st.u;
    if (coeff != 0.0) {
      Operator up = positive_power(st.u, p);
      w = Operator(st.u.mat + (dt * coeff) * up.mat, true, true);
    }
    auto ch = cache.get(cfg, dt);
    double leak = 0.0;
    next.u = ch->apply(w, &leak);
  } else {
    auto half = cache.get(cfg, 0.5 * dt);
    double leak = 0.0;
    Operator v = half->apply(st.u, &leak);            // state at the midpoint, linear part
    Operator lin = half->apply(v, &leak);             // Heat_dt(u)
    if (coeff == 0.0) {
      next.u = lin;
    } else {
      Operator vp = positive_power(v, p);
      Operator m(v.mat + (0.5 * dt * coeff) * vp.mat, true, true);
      Operator mp = positive_power(m, p);
      Operator tail = half->apply(mp, &leak);
      next.u = Operator(lin.mat + (dt * coeff) * tail.mat, true, true);
    }
  }
  next.u.mat = la::hermitize(next.u.mat);
  next.t = st.t + dt;

  const double sup = sup_eig(next.u);
  if (!std::isfinite(sup) || sup >= ceiling) next.overflowed = true;
  return next;
}

PicardResult picard_window(const ModelConfig& cfg, const Operator& u0, double q, double p,
                           double tol, ChannelCache& cache, int grid_points) {
  cfg.require_calibrated();
  PicardResult res;
  res.c_p = (p == 1.0) ? 1.0 : doi_constant(p);
  const double nq = lp_norm(cfg, u0, q);
  const double ninf = lp_norm(cfg, u0, std::numeric_limits<double>::infinity());
  res.delta = std::max(nq, ninf);
  if (res.delta <= 0.0) {
    // zero data: the fixed point is identically zero
    res.window = 0.0;
    res.grid = {0.0};
    res.trajectory = {u0};
    return res;
  }
  res.window = 0.5 * std::min(std::pow(2.0, -p) * std::pow(res.delta, 1.0 - p) / res.c_p, 1.0);

  const int g = grid_points;
  const double step = res.window / g;
  auto ch = cache.get(cfg, step);

  // Linear part heat_{t_i} u0 along the grid.
  std::vector<Operator> lin(g + 1);
  lin[0] = u0;
  for (int i = 1; i <= g; ++i) {
    double leak = 0.0;
    lin[i] = ch->apply(lin[i - 1], &leak);
  }
  res.grid.resize(g + 1);
  for (int i = 0; i <= g; ++i) res.grid[i] = i * step;

  auto x1_norm = [&](const Operator& v) {
    auto prof = singular_profile(cfg, v);
    return lp_norm(prof, q) + lp_norm(prof, std::numeric_limits<double>::infinity());
  };

  std::vector<Operator> cur = lin;  // zeroth iterate: the linear flow
  double prev_diff = -1.0;
  for (int it = 1; it <= 60; ++it) {
    // Trapezoid recursion for the Duhamel tail I with F = cur^p:
    // I_{i+1} = Heat_step(I_i + (step/2) F_i) + (step/2) F_{i+1}.
    std::vector<Operator> fp(g + 1);
    for (int i = 0; i <= g; ++i) fp[i] = positive_power(cur[i], p);
    std::vector<Operator> next(g + 1);
    next[0] = u0;
    Operator tail(Matrix(u0.dim(), u0.dim()), true, true);
    for (int i = 0; i < g; ++i) {
      Operator carry(tail.mat + (0.5 * step) * fp[i].mat, true, true);
      double leak = 0.0;
      tail = ch->apply(carry, &leak);
      tail = Operator(tail.mat + (0.5 * step) * fp[i + 1].mat, true, true);
      next[i + 1] = Operator(lin[i + 1].mat + tail.mat, true, true);
    }
    double diff = 0.0;
    for (int i = 0; i <= g; ++i) diff = std::max(diff, x1_norm(Operator(next[i].mat - cur[i].mat)));
    res.diffs.push_back(diff);
    res.iterations = it;
    cur = std::move(next);
    if (prev_diff > 0.0 && diff > 1e-14) {
      const double ratio = diff / prev_diff;
      res.worst_ratio = std::max(res.worst_ratio, ratio);
      if (ratio > 0.95)
        throw NotContracting("picard_window: successive-iterate ratio " + std::to_string(ratio));
    }
    prev_diff = diff;
    if (diff < tol) break;
  }
  res.trajectory = std::move(cur);
  return res;
}

CertificateReport blowup_certificate(const ModelConfig& cfg, const Operator& u0, double p,
                                     const std::vector<double>& t_grid, ChannelCache& cache) {
  if (p <= 1.0) throw InvalidExponent("blowup_certificate: p must exceed 1");
  CertificateReport rep;
  rep.advisory = !(p < 2.0);
  rep.threshold = std::pow(p - 1.0, -1.0 / (p - 1.0));
  std::vector<double> ts = t_grid;
  std::sort(ts.begin(), ts.end());

  // Reduced node count: the functional only needs the sup norm.
  ModelConfig cert_cfg = cfg;
  cert_cfg.quad_order = std::max(12, cfg.quad_order * 3 / 5);

  HeatFlow flow(cert_cfg, cache, u0);
  double best = -std::numeric_limits<double>::infinity();
  for (double t : ts) {
    flow.advance_to(t);
    const double val = std::pow(t, 1.0 / (p - 1.0)) * flow.sup_norm();
    rep.curve.emplace_back(t, val);
    best = std::max(best, val);
    if (!rep.violated_at && val > rep.threshold) rep.violated_at = t;
  }
  rep.margin = best - rep.threshold;
  return rep;
}

std::vector<MonitorEntry> windowed_certificates(
    const ModelConfig& cfg, const std::vector<std::pair<double, Operator>>& snapshots, double p,
    double horizon, int grid_points, ChannelCache& cache) {
  std::vector<MonitorEntry> out;
  for (const auto& [s1, u] : snapshots) {
    const double span = horizon - s1;
    if (span <= 0.0) continue;
    auto grid = log_grid(std::min(0.05, span / grid_points), span, grid_points);
    MonitorEntry e;
    e.s1 = s1;
    e.cert = blowup_certificate(cfg, u, p, grid, cache);
    out.push_back(std::move(e));
  }
  return out;
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kBlowUp: return "blow-up";
    case Outcome::kGlobalCandidate: return "global-candidate";
    default: return "undecided";
  }
}

double fit_decay_exponent(const std::vector<std::pair<double, double>>& curve, double t_lo,
                          double t_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& [t, y] : curve) {
    if (t < t_lo || t > t_hi || !(y > 0.0) || !(t > 0.0)) continue;
    const double x = std::log(t), ly = std::log(y);
    sx += x;
    sy += ly;
    sxx += x * x;
    sxy += x * ly;
    ++n;
  }
  if (n < 3) return kNan;
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) return kNan;
  return -(n * sxy - sx * sy) / denom;  // positive = decaying
}

void decide_outcome(const OutcomeInputs& in, const ClassifyThresholds& th, SweepRecord& rec) {
  rec.max_uinf = 0.0;
  for (double s : in.probes.sup) rec.max_uinf = std::max(rec.max_uinf, s);
  rec.t_detect = kNan;
  rec.decay_fit = kNan;

  double detect = std::numeric_limits<double>::infinity();
  if (in.overflowed) detect = std::min(detect, in.t_overflow);
  if (in.cert_violation_t) detect = std::min(detect, *in.cert_violation_t);
  if (std::isfinite(detect)) {
    rec.outcome = Outcome::kBlowUp;
    rec.t_detect = detect;
    rec.reason = in.overflowed ? "sup norm ceiling" : "certificate margin";
    return;
  }

  const double t_end = in.probes.t.empty() ? 0.0 : in.probes.t.back();
  if (t_end < in.horizon * (1.0 - 1e-9)) {
    rec.outcome = Outcome::kUndecided;
    rec.reason = "trajectory stopped before horizon";
    return;
  }

  std::vector<std::pair<double, double>> curve;
  for (size_t i = 0; i < in.probes.t.size(); ++i)
    curve.emplace_back(in.probes.t[i], in.use_q_norm ? in.probes.qn[i] : in.probes.sup[i]);
  const double fit = fit_decay_exponent(curve, t_end / 10.0, t_end);
  rec.decay_fit = fit;
  if (!std::isfinite(fit) || fit < in.beta - th.decay_slope_tol) {
    rec.outcome = Outcome::kUndecided;
    rec.reason = "monitored norm not decaying at the guaranteed rate";
    return;
  }

  // A slowly amplifying subcritical trajectory can decay in sup while its
  // mass grows without bound; a global candidate must also have settled in
  // L1 over the trailing decade.
  if (!in.probes.mass.empty()) {
    double m_ref = in.probes.mass.back();
    for (size_t i = 0; i < in.probes.t.size(); ++i)
      if (in.probes.t[i] <= t_end / 10.0) m_ref = in.probes.mass[i];
    const double growth = in.probes.mass.back() / std::max(m_ref, 1e-300) - 1.0;
    if (growth > th.mass_growth_tol) {
      rec.outcome = Outcome::kUndecided;
      rec.reason = "mass still growing at the horizon";
      return;
    }
  }
  rec.outcome = Outcome::kGlobalCandidate;
}

namespace {

// Power-of-two dt ladder: doubles as t crosses 1, 3, 7, 15, ... so channel
// widths stay cacheable; shrinks by the nonlinear safety factor near blow-up.
double schedule_dt(const ClassifyThresholds& th, double t, double sup, double p,
                   double remaining) {
  double dt = th.dt0;
  while (dt * 2.0 <= th.dt_max && t >= 2.0 * dt / th.dt0 - 1.0) dt *= 2.0;
  if (sup > 0.0 && p > 1.0) {
    const double nl = th.dt_safety * std::pow(sup, 1.0 - p);
    while (dt > th.dt0 / 1024.0 && dt > nl) dt *= 0.5;
  }
  return std::min(dt, remaining);
}

SweepRecord classify_gaussian_cell(const ModelConfig& cfg, const Operator& base,
                                   const GaussianData& u0_spec, double p, double horizon,
                                   const ClassifyThresholds& th, uint64_t cell_seed,
                                   ChannelCache& cache) {
  cfg.require_calibrated();
  SweepRecord rec;
  rec.p = p;
  rec.amplitude = u0_spec.amplitude;
  rec.cell_seed = cell_seed;
  rec.cert_margin = kNan;
  rec.beta = kNan;
  rec.q = kNan;
  rec.r = 0.5 * 2.0 * (p - 1.0);
  rec.t_detect = kNan;
  rec.decay_fit = kNan;

  OutcomeInputs in;
  in.horizon = horizon;
  const double p_fujita = 2.0;  // matrix model realizes d = 2
  if (p > p_fujita) {
    FujitaParams fp = (th.q_override > 0.0) ? fujita_params(2, p, th.q_override)
                                            : fujita_params(2, p);
    rec.beta = fp.beta;
    rec.q = fp.q;
    in.beta = fp.beta;
    in.use_q_norm = true;
  } else {
    // Subcritical cells monitor the sup norm against half the free-decay rate.
    in.beta = 0.5;
    in.use_q_norm = false;
  }

  Matrix base_blk = (base.mat.rows() == cfg.n) ? base.mat : base.mat.block(cfg.n, cfg.n);
  Operator u0(u0_spec.amplitude * base_blk, true, true);
  const double sup0 = sup_eig(u0);
  const double ceiling = th.ceiling_factor * sup0;

  EvolutionState st;
  st.u = u0;
  st.scheme = Scheme::kMidpoint;

  const double q_probe = in.use_q_norm ? rec.q : 0.0;
  auto probe = [&](double t, const Operator& u) {
    auto e = la::eigh(u.mat);
    double sup = 0.0, qs = 0.0, mass = 0.0;
    for (double lam : e.values) {
      const double v = std::abs(lam);
      sup = std::max(sup, v);
      mass += v;
      if (q_probe > 0.0 && lam > 0.0) qs += std::pow(lam, q_probe);
    }
    in.probes.t.push_back(t);
    in.probes.sup.push_back(sup);
    in.probes.qn.push_back(q_probe > 0.0 ? std::pow(cfg.c_tau * qs, 1.0 / q_probe) : 0.0);
    in.probes.mass.push_back(cfg.c_tau * mass);
    return sup;
  };
  double sup = probe(1e-12, u0);  // t=0 probe at a positive timestamp for log fits

  std::vector<std::pair<double, Operator>> snapshots;
  size_t next_frac = 0;
  std::vector<double> fracs = th.cert_fracs;
  std::sort(fracs.begin(), fracs.end());
  const bool want_certs = (p > 1.0 && p < 2.0);
  if (want_certs && next_frac < fracs.size() && fracs[next_frac] <= 0.0) {
    snapshots.emplace_back(0.0, u0);
    ++next_frac;
  }

  while (st.t < horizon * (1.0 - 1e-12) && !st.overflowed) {
    const double dt = schedule_dt(th, st.t, sup, p, horizon - st.t);
    st = duhamel_step(cfg, st, dt, p, cache, ceiling);
    rec.dt_final = dt;
    sup = probe(st.t, st.u);
    if (want_certs && next_frac < fracs.size() && st.t >= fracs[next_frac] * horizon) {
      snapshots.emplace_back(st.t, st.u);
      ++next_frac;
    }
  }
  in.overflowed = st.overflowed;
  in.t_overflow = st.t;

  if (want_certs) {
    auto mons = windowed_certificates(cfg, snapshots, p, horizon, th.cert_grid_points, cache);
    for (const auto& m : mons) {
      if (m.s1 == 0.0) rec.cert_margin = m.cert.margin;
      if (m.cert.violated_at) {
        const double t_v = m.s1 + *m.cert.violated_at;
        if (!in.cert_violation_t || t_v < *in.cert_violation_t) in.cert_violation_t = t_v;
      }
    }
  }

  decide_outcome(in, th, rec);
  return rec;
}

}  // namespace

SweepRecord classify_cell(const ModelConfig& cfg, const GaussianData& u0_spec, double p,
                          double horizon, const ClassifyThresholds& thresholds, uint64_t cell_seed,
                          ChannelCache& cache) {
  Operator base = gaussian_operator(cfg, u0_spec.t0);
  return classify_gaussian_cell(cfg, base, u0_spec, p, horizon, thresholds, cell_seed, cache);
}

std::vector<SweepRecord> fujita_sweep(const ModelConfig& cfg, const std::vector<double>& p_grid,
                                      const std::vector<double>& amplitude_grid, double horizon,
                                      uint64_t seed, const ClassifyThresholds& thresholds,
                                      int threads) {
  cfg.require_calibrated();
  struct Cell {
    double p, amplitude;
    uint64_t seed;
  };
  std::vector<Cell> cells;
  for (double p : p_grid)
    for (double a : amplitude_grid)
      cells.push_back({p, a, Rng::derive(seed, cells.size())});
  std::vector<SweepRecord> records(cells.size());
  if (cells.empty()) return records;

  const GaussianData data_shape;  // amplitude filled per cell
  Operator base = gaussian_operator(cfg, data_shape.t0);
  ChannelCache cache(6);
  std::atomic<size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = cursor.fetch_add(1);
      if (i >= cells.size()) break;
      const auto& c = cells[i];
      try {
        records[i] = classify_gaussian_cell(cfg, base, GaussianData{c.amplitude, data_shape.t0},
                                            c.p, horizon, thresholds, c.seed, cache);
      } catch (const std::exception& e) {
        SweepRecord rec;
        rec.p = c.p;
        rec.amplitude = c.amplitude;
        rec.cell_seed = c.seed;
        rec.outcome = Outcome::kUndecided;
        rec.reason = e.what();
        rec.t_detect = kNan;
        rec.cert_margin = kNan;
        rec.beta = kNan;
        rec.q = kNan;
        rec.r = kNan;
        rec.decay_fit = kNan;
        records[i] = rec;
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(cells.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::stable_sort(records.begin(), records.end(), [](const SweepRecord& a, const SweepRecord& b) {
    if (a.p != b.p) return a.p < b.p;
    return a.amplitude < b.amplitude;
  });
  return records;
}

std::string sweep_csv_header(bool classical_columns) {
  std::string h = "p,amplitude,outcome,t_detect,max_uinf,lemma61_margin,beta,q,r,decay_fit,"
                  "dt_final,cell_seed";
  if (classical_columns) h += ",d,L,n";
  return h + "\n";
}

namespace {
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}
}  // namespace

std::string sweep_csv_row(const SweepRecord& r, bool classical_columns) {
  std::ostringstream os;
  os << fmt(r.p) << ',' << fmt(r.amplitude) << ',' << outcome_name(r.outcome) << ','
     << fmt(r.t_detect) << ',' << fmt(r.max_uinf) << ',' << fmt(r.cert_margin) << ','
     << fmt(r.beta) << ',' << fmt(r.q) << ',' << fmt(r.r) << ',' << fmt(r.decay_fit) << ','
     << fmt(r.dt_final) << ',' << r.cell_seed;
  if (classical_columns) os << ',' << r.grid_d << ',' << fmt(r.grid_box) << ',' << r.grid_n;
  os << '\n';
  return os.str();
}

SweepRecord sweep_csv_parse_row(const std::string& line, bool classical_columns) {
  std::vector<std::string> f;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      f.push_back(cur);
      cur.clear();
    } else if (c != '\n') {
      cur += c;
    }
  }
  f.push_back(cur);
  const size_t expect = classical_columns ? 15 : 12;
  if (f.size() != expect) throw Error("sweep_csv_parse_row: wrong column count");
  SweepRecord r;
  r.p = std::strtod(f[0].c_str(), nullptr);
  r.amplitude = std::strtod(f[1].c_str(), nullptr);
  if (f[2] == "blow-up") r.outcome = Outcome::kBlowUp;
  else if (f[2] == "global-candidate") r.outcome = Outcome::kGlobalCandidate;
  else r.outcome = Outcome::kUndecided;
  r.t_detect = std::strtod(f[3].c_str(), nullptr);
  r.max_uinf = std::strtod(f[4].c_str(), nullptr);
  r.cert_margin = std::strtod(f[5].c_str(), nullptr);
  r.beta = std::strtod(f[6].c_str(), nullptr);
  r.q = std::strtod(f[7].c_str(), nullptr);
  r.r = std::strtod(f[8].c_str(), nullptr);
  r.decay_fit = std::strtod(f[9].c_str(), nullptr);
  r.dt_final = std::strtod(f[10].c_str(), nullptr);
  r.cell_seed = std::strtoull(f[11].c_str(), nullptr, 10);
  if (classical_columns) {
    r.grid_d = std::atoi(f[12].c_str());
    r.grid_box = std::strtod(f[13].c_str(), nullptr);
    r.grid_n = std::atoi(f[14].c_str());
  }
  return r;
}

}  // namespace ncheat
