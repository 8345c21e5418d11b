#include "ncheat/classical.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "ncheat/la/fft.hpp"
#include "ncheat/rng.hpp"

namespace ncheat {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}  // namespace

double GridField::cell_volume() const { return std::pow(dx(), d); }

double GridField::mass() const {
  double s = 0.0;
  for (double x : v) s += x;
  return s * cell_volume();
}

double GridField::sup() const {
  double s = 0.0;
  for (double x : v) s = std::max(s, x);
  return s;
}

double GridField::lq_norm(double q) const {
  if (std::isinf(q)) return sup();
  double s = 0.0;
  for (double x : v)
    if (x > 0.0) s += std::pow(x, q);
  return std::pow(s * cell_volume(), 1.0 / q);
}

double GridField::boundary_mass_fraction() const {
  double inside = 0.0, total = 0.0;
  const double half = 0.5 * box;
  for (size_t flat = 0; flat < v.size(); ++flat) {
    size_t rem = flat;
    bool in = true;
    for (int ax = d - 1; ax >= 0; --ax) {
      const int i = static_cast<int>(rem % n);
      rem /= n;
      const double x = -box + i * dx();
      if (std::abs(x) > half) in = false;
    }
    total += v[flat];
    if (in) inside += v[flat];
  }
  return total > 0.0 ? (total - inside) / total : 0.0;
}

GridField make_grid_field(int d, double box, int n,
                          const std::function<double(const std::vector<double>&)>& f) {
  if (d < 1 || d > 3) throw Error("make_grid_field: d must be 1, 2, or 3");
  if (!la::is_pow2(n)) throw Error("make_grid_field: n must be a power of two");
  GridField g;
  g.d = d;
  g.box = box;
  g.n = n;
  size_t total = 1;
  for (int i = 0; i < d; ++i) total *= n;
  g.v.resize(total);
  std::vector<double> x(d);
  for (size_t flat = 0; flat < total; ++flat) {
    size_t rem = flat;
    for (int ax = d - 1; ax >= 0; --ax) {
      x[ax] = -box + static_cast<int>(rem % n) * g.dx();
      rem /= n;
    }
    g.v[flat] = f(x);
  }
  return g;
}

GridField gaussian_bump(int d, double box, int n, double amplitude, double t0) {
  return make_grid_field(d, box, n, [&](const std::vector<double>& x) {
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    return amplitude * std::pow(4.0 * kPi * t0, -0.5 * d) * std::exp(-r2 / (4.0 * t0));
  });
}

namespace {

// Apply a radial Fourier multiplier m(|k|^2) in place.
void apply_multiplier(GridField& g, const std::function<double(double)>& mult) {
  const int n = g.n, d = g.d;
  std::vector<cplx> buf(g.v.size());
  for (size_t i = 0; i < g.v.size(); ++i) buf[i] = g.v[i];

  // FFT along each axis.
  std::vector<cplx> line(n);
  size_t total = buf.size();
  for (int ax = 0; ax < d; ++ax) {
    size_t stride = 1;
    for (int a = ax + 1; a < d; ++a) stride *= n;
    const size_t nlines = total / n;
    for (size_t l = 0; l < nlines; ++l) {
      // Decompose the line index into the non-axis coordinates.
      size_t rem = l, base = 0;
      for (int a = d - 1; a >= 0; --a) {
        if (a == ax) continue;
        const size_t coord = rem % n;
        rem /= n;
        size_t astride = 1;
        for (int b = a + 1; b < d; ++b) astride *= n;
        base += coord * astride;
      }
      for (int i = 0; i < n; ++i) line[i] = buf[base + i * stride];
      la::fft(line, false);
      for (int i = 0; i < n; ++i) buf[base + i * stride] = line[i];
    }
  }

  // Multiplier on the frequency lattice k_j = (pi / box) * signed index.
  const double k0 = kPi / g.box;
  std::vector<double> k2(n);
  for (int i = 0; i < n; ++i) {
    const int m = (i <= n / 2) ? i : i - n;
    k2[i] = (k0 * m) * (k0 * m);
  }
  for (size_t flat = 0; flat < total; ++flat) {
    size_t rem = flat;
    double ksq = 0.0;
    for (int ax = d - 1; ax >= 0; --ax) {
      ksq += k2[rem % n];
      rem /= n;
    }
    buf[flat] *= mult(ksq);
  }

  for (int ax = 0; ax < d; ++ax) {
    size_t stride = 1;
    for (int a = ax + 1; a < d; ++a) stride *= n;
    const size_t nlines = total / n;
    for (size_t l = 0; l < nlines; ++l) {
      size_t rem = l, base = 0;
      for (int a = d - 1; a >= 0; --a) {
        if (a == ax) continue;
        const size_t coord = rem % n;
        rem /= n;
        size_t astride = 1;
        for (int b = a + 1; b < d; ++b) astride *= n;
        base += coord * astride;
      }
      for (int i = 0; i < n; ++i) line[i] = buf[base + i * stride];
      la::fft(line, true);
      for (int i = 0; i < n; ++i) buf[base + i * stride] = line[i];
    }
  }

  const double clamp = 1e-14 * g.sup();
  for (size_t i = 0; i < total; ++i) {
    double x = buf[i].real();
    if (x < 0.0 && x > -clamp) x = 0.0;
    g.v[i] = x;
  }
}

}  // namespace

GridField heat_apply_classical(const GridField& field, double t) {
  if (t <= 0.0) throw Error("heat_apply_classical: t must be positive");
  if (field.boundary_mass_fraction() > 1e-8)
    throw BoxTooSmall("heat_apply_classical: boundary mass above tolerance");
  GridField out = field;
  apply_multiplier(out, [&](double k2) { return std::exp(-t * k2); });
  return out;
}

CertificateReport blowup_certificate_classical(const GridField& u0, double p,
                                               const std::vector<double>& t_grid) {
  if (p <= 1.0) throw InvalidExponent("blowup_certificate_classical: p must exceed 1");
  CertificateReport rep;
  rep.advisory = !(p < 2.0);
  rep.threshold = std::pow(p - 1.0, -1.0 / (p - 1.0));
  std::vector<double> ts = t_grid;
  std::sort(ts.begin(), ts.end());
  double best = -std::numeric_limits<double>::infinity();
  for (double t : ts) {
    GridField ht = u0;
    apply_multiplier(ht, [&](double k2) { return std::exp(-t * k2); });
    const double val = std::pow(t, 1.0 / (p - 1.0)) * ht.sup();
    rep.curve.emplace_back(t, val);
    best = std::max(best, val);
    if (!rep.violated_at && val > rep.threshold) rep.violated_at = t;
  }
  rep.margin = best - rep.threshold;
  return rep;
}

double critical_certificate_amplitude(const GridField& shape, double p,
                                      const std::vector<double>& t_grid, double hi_start) {
  // The functional is linear in the amplitude, but bisect anyway: the same
  // path then works for any monotone margin(A).
  auto margin = [&](double amp) {
    GridField u = shape;
    for (auto& x : u.v) x *= amp;
    return blowup_certificate_classical(u, p, t_grid).margin;
  };
  double lo = 0.0, hi = hi_start;
  int guard = 0;
  while (margin(hi) <= 0.0) {
    hi *= 2.0;
    if (++guard > 60) throw NotConverged("critical_certificate_amplitude: margin never positive");
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (margin(mid) <= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// dt ladder shared with the operator model.
double schedule_dt_classical(const ClassifyThresholds& th, double t, double sup, double p,
                             double remaining) {
  double dt = th.dt0;
  while (dt * 2.0 <= th.dt_max && t >= 2.0 * dt / th.dt0 - 1.0) dt *= 2.0;
  if (sup > 0.0 && p > 1.0) {
    const double nl = th.dt_safety * std::pow(sup, 1.0 - p);
    while (dt > th.dt0 / 1024.0 && dt > nl) dt *= 0.5;
  }
  return std::min(dt, remaining);
}

GridField pointwise_power(const GridField& u, double p) {
  GridField w = u;
  for (auto& x : w.v) x = x > 0.0 ? std::pow(x, p) : 0.0;
  return w;
}

void heat_inplace(GridField& g, double t) {
  apply_multiplier(g, [&](double k2) { return std::exp(-t * k2); });
}

}  // namespace

SweepRecord evolve_classical(const GridField& u0, double p, double horizon,
                             const ClassifyThresholds& th, uint64_t cell_seed,
                             ClassicalTrajectory* trajectory_out) {
  SweepRecord rec;
  rec.p = p;
  rec.cell_seed = cell_seed;
  rec.grid_d = u0.d;
  rec.grid_box = u0.box;
  rec.grid_n = u0.n;
  rec.cert_margin = kNan;
  rec.beta = kNan;
  rec.q = kNan;
  rec.r = 0.5 * u0.d * (p - 1.0);
  rec.amplitude = kNan;  // caller fills for parametric families

  OutcomeInputs in;
  in.horizon = horizon;
  const double p_fujita = 1.0 + 2.0 / u0.d;
  if (p > p_fujita) {
    FujitaParams fp = (th.q_override > 0.0) ? fujita_params(u0.d, p, th.q_override)
                                            : fujita_params(u0.d, p);
    rec.beta = fp.beta;
    rec.q = fp.q;
    in.beta = fp.beta;
    in.use_q_norm = true;
  } else {
    in.beta = 0.25 * u0.d;  // half the free sup-norm decay rate
    in.use_q_norm = false;
  }

  const double sup0 = u0.sup();
  const double ceiling = th.ceiling_factor * sup0;
  const double q_probe = in.use_q_norm ? rec.q : 0.0;

  GridField u = u0;
  double t = 0.0;
  bool overflowed = false;
  ClassicalTrajectory traj;

  auto probe = [&](double at) {
    in.probes.t.push_back(std::max(at, 1e-12));
    in.probes.sup.push_back(u.sup());
    in.probes.qn.push_back(q_probe > 0.0 ? u.lq_norm(q_probe) : 0.0);
    in.probes.mass.push_back(u.mass());
  };
  probe(0.0);

  const bool want_certs = (p > 1.0 && p < 2.0);
  std::vector<double> fracs = th.cert_fracs;
  std::sort(fracs.begin(), fracs.end());
  size_t next_frac = 0;
  if (want_certs && next_frac < fracs.size() && fracs[next_frac] <= 0.0) {
    traj.t.push_back(0.0);
    traj.snapshots.push_back(u);
    ++next_frac;
  }

  int steps = 0;
  while (t < horizon * (1.0 - 1e-12) && !overflowed) {
    const double dt = schedule_dt_classical(th, t, u.sup(), p, horizon - t);
    // Midpoint Duhamel with the pointwise power.
    GridField v = u;
    heat_inplace(v, 0.5 * dt);
    GridField lin = v;
    heat_inplace(lin, 0.5 * dt);
    GridField m = v;
    {
      GridField vp = pointwise_power(v, p);
      for (size_t i = 0; i < m.v.size(); ++i) m.v[i] += 0.5 * dt * vp.v[i];
    }
    GridField tail = pointwise_power(m, p);
    heat_inplace(tail, 0.5 * dt);
    for (size_t i = 0; i < u.v.size(); ++i) u.v[i] = lin.v[i] + dt * tail.v[i];
    t += dt;
    rec.dt_final = dt;

    const double sup = u.sup();
    if (!std::isfinite(sup) || sup >= ceiling) overflowed = true;
    // Box adequacy only matters for spreading solutions; a focusing spike
    // sprays spectral ripples everywhere once it nears the grid scale.
    if (!overflowed && sup < 50.0 * sup0 && (++steps % 16) == 0 &&
        u.boundary_mass_fraction() > 1e-8)
      throw BoxTooSmall("evolve_classical: spreading mass reached the box boundary");
    probe(t);
    if (want_certs && next_frac < fracs.size() && t >= fracs[next_frac] * horizon) {
      traj.t.push_back(t);
      traj.snapshots.push_back(u);
      ++next_frac;
    }
  }
  in.overflowed = overflowed;
  in.t_overflow = t;

  if (want_certs) {
    for (size_t i = 0; i < traj.snapshots.size(); ++i) {
      const double s1 = traj.t[i];
      const double span = horizon - s1;
      if (span <= 0.0) continue;
      auto grid = log_grid(std::min(0.05, span / th.cert_grid_points), span, th.cert_grid_points);
      auto cert = blowup_certificate_classical(traj.snapshots[i], p, grid);
      if (s1 == 0.0) rec.cert_margin = cert.margin;
      if (cert.violated_at) {
        const double t_v = s1 + *cert.violated_at;
        if (!in.cert_violation_t || t_v < *in.cert_violation_t) in.cert_violation_t = t_v;
      }
    }
  }

  decide_outcome(in, th, rec);
  if (trajectory_out) {
    traj.probes = in.probes;
    traj.overflowed = overflowed;
    traj.t_end = t;
    *trajectory_out = std::move(traj);
  }
  return rec;
}

std::vector<SweepRecord> fujita_sweep_classical(int d, double box, int n,
                                                const std::vector<double>& p_grid,
                                                const std::vector<double>& amplitude_grid,
                                                double horizon, uint64_t seed,
                                                const ClassifyThresholds& thresholds, int threads,
                                                double t0) {
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

  std::atomic<size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = cursor.fetch_add(1);
      if (i >= cells.size()) break;
      const auto& c = cells[i];
      // Expanding-box retries: double the box (same resolution) on
      // BoxTooSmall, up to three times.
      double cur_box = box;
      int cur_n = n;
      for (int attempt = 0;; ++attempt) {
        try {
          GridField u0 = gaussian_bump(d, cur_box, cur_n, c.amplitude, t0);
          records[i] = evolve_classical(u0, c.p, horizon, thresholds, c.seed);
          records[i].amplitude = c.amplitude;
          break;
        } catch (const BoxTooSmall&) {
          if (attempt >= 3) {
            SweepRecord rec;
            rec.p = c.p;
            rec.amplitude = c.amplitude;
            rec.cell_seed = c.seed;
            rec.grid_d = d;
            rec.grid_box = cur_box;
            rec.grid_n = cur_n;
            rec.reason = "box too small after retries";
            rec.t_detect = kNan;
            rec.cert_margin = kNan;
            rec.beta = kNan;
            rec.q = kNan;
            rec.r = kNan;
            rec.decay_fit = kNan;
            records[i] = rec;
            break;
          }
          cur_box *= 2.0;
          cur_n *= 2;
        } catch (const std::exception& e) {
          SweepRecord rec;
          rec.p = c.p;
          rec.amplitude = c.amplitude;
          rec.cell_seed = c.seed;
          rec.grid_d = d;
          rec.grid_box = cur_box;
          rec.grid_n = cur_n;
          rec.reason = e.what();
          rec.t_detect = kNan;
          rec.cert_margin = kNan;
          rec.beta = kNan;
          rec.q = kNan;
          rec.r = kNan;
          rec.decay_fit = kNan;
          records[i] = rec;
          break;
        }
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

}  // namespace ncheat
