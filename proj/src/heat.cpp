#include "ncheat/heat.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <thread>
#include <tuple>

#include "ncheat/algebra.hpp"
#include "ncheat/la/quadrature.hpp"

namespace ncheat {

namespace {
constexpr double kPi = std::numbers::pi;
}

double tau(const ModelConfig& cfg, const Operator& u) {
  cfg.require_calibrated();
  return cfg.c_tau * u.mat.trace().real();
}

Operator gaussian_operator(const ModelConfig& cfg, double t) {
  cfg.validate();
  if (t <= 0.0) throw Error("gaussian_operator: t must be positive");

  // Cache: the same few times recur across calibration, tests, and sweeps.
  struct Key {
    int n_pad;
    long long h_key, t_key;
    bool operator<(const Key& o) const {
      return std::tie(n_pad, h_key, t_key) < std::tie(o.n_pad, o.h_key, o.t_key);
    }
  };
  static std::map<Key, Matrix> cache;
  static std::mutex cache_mutex;
  const Key key{cfg.n_pad, std::llround(cfg.h * 1e9), std::llround(t * 1e9)};
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return Operator(it->second, true, true);
  }

  // (2 pi)^-2 * integral of e^{-t |zeta|^2} W(zeta). Each entry of W carries
  // its own Gaussian e^{-h |zeta|^2 / 4} times a polynomial of degree m + n,
  // so the tensor Gauss-Hermite rule is scaled by the combined width
  // sigma = sqrt(t + h/4) and needs about n_pad nodes per axis to integrate
  // the highest modes exactly.
  const int order = cfg.n_pad + 16;
  const auto& q = la::gauss_hermite(order);
  const double rh = std::sqrt(cfg.h);
  const double sigma2 = t + 0.25 * cfg.h;
  const double sigma = std::sqrt(sigma2);

  struct NodeSpec {
    double a, b, wt;
    bool self;
  };
  std::vector<NodeSpec> nodes;
  const double pref = 1.0 / (4.0 * kPi * kPi * sigma2);
  for (int i = 0; i < order; ++i) {
    for (int j = 0; j < order; ++j) {
      const int mi = order - 1 - i, mj = order - 1 - j;
      if (std::make_pair(mi, mj) < std::make_pair(i, j)) continue;
      // compensate the part of the weight the displacement entries provide
      const double extra = 0.25 * cfg.h / sigma2 * (q.x[i] * q.x[i] + q.x[j] * q.x[j]);
      nodes.push_back({rh * q.x[i] / sigma, rh * q.x[j] / sigma,
                       pref * q.w[i] * q.w[j] * std::exp(extra), mi == i && mj == j});
    }
  }

  // Fixed-chunk parallel assembly with an ordered reduce keeps the result
  // bitwise independent of the thread count.
  const int nthreads = std::clamp(
      static_cast<int>(std::thread::hardware_concurrency()), 1, 4);
  const size_t chunk = (nodes.size() + nthreads - 1) / nthreads;
  std::vector<Matrix> partial(nthreads, Matrix(cfg.n_pad, cfg.n_pad));
  auto work = [&](int tid) {
    const size_t lo = tid * chunk, hi = std::min(nodes.size(), lo + chunk);
    for (size_t k = lo; k < hi; ++k) {
      const auto& nd = nodes[k];
      Matrix w = weyl_matrix(cfg.n_pad, nd.a, nd.b, weyl_quad_order(cfg.n_pad, nd.b));
      w.axpy_to(partial[tid], nd.wt);
      if (!nd.self) {
        Matrix wa = w.adjoint();
        wa.axpy_to(partial[tid], nd.wt);
      }
    }
  };
  if (nthreads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int tIdx = 0; tIdx < nthreads; ++tIdx) pool.emplace_back(work, tIdx);
    for (auto& th : pool) th.join();
  }
  Matrix acc(cfg.n_pad, cfg.n_pad);
  for (const auto& part : partial) acc += part;
  Matrix herm = la::hermitize(acc);
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    cache.emplace(key, herm);
  }
  return Operator(std::move(herm), /*herm=*/true, /*pos=*/true);
}

std::vector<double> gaussian_thermal_eigs(const ModelConfig& cfg, double t, int count) {
  const double w = (4.0 * t - cfg.h) / (4.0 * t + cfg.h);
  std::vector<double> e(count);
  double wk = 1.0;
  for (int k = 0; k < count; ++k) {
    e[k] = (1.0 - w) * wk / (2.0 * kPi * cfg.h);
    wk *= w;
  }
  return e;
}

HeatChannel::HeatChannel(const ModelConfig& cfg, double width) {
  cfg.validate();
  if (width <= 0.0) throw Error("HeatChannel: width must be positive");
  n_ = cfg.n;
  n_pad_ = cfg.n_pad;
  width_ = width;
  const int order = cfg.quad_order;
  const auto& q = la::gauss_hermite(order);
  // heat_t u = integral of h^2 G_t(h J zeta) W(zeta) u W(zeta)^dagger;
  // Gauss-Hermite in zeta = (2 sqrt(t)/h) x gives probability weights w_i w_j / pi.
  const double s = 2.0 * std::sqrt(width) / cfg.h;
  const double rh = std::sqrt(cfg.h);
  weight_sum_ = 0.0;
  for (int i = 0; i < order; ++i) {
    for (int j = 0; j < order; ++j) {
      const int mi = order - 1 - i, mj = order - 1 - j;
      if (std::make_pair(mi, mj) < std::make_pair(i, j)) continue;
      const bool self = (mi == i && mj == j);
      Node node;
      node.w = q.w[i] * q.w[j] / kPi;
      node.with_adjoint = !self;
      const double a = rh * s * q.x[i];
      const double b = rh * s * q.x[j];
      node.disp = weyl_matrix(cfg.n_pad, a, b, weyl_quad_order(cfg.n_pad, b));
      weight_sum_ += node.w * (self ? 1.0 : 2.0);
      nodes_.push_back(std::move(node));
    }
  }
}

Matrix HeatChannel::apply_padded(const Matrix& u_pad) const {
  if (u_pad.rows() != n_pad_ || u_pad.cols() != n_pad_)
    throw DimensionMismatch("HeatChannel: state must be at the padded dimension");
  Matrix acc(n_pad_, n_pad_);
  Matrix scratch;
  for (const auto& node : nodes_) {
    la::sandwich_acc(acc, node.disp, u_pad, node.w, scratch);
    if (node.with_adjoint) {
      Matrix adj = node.disp.adjoint();
      la::sandwich_acc(acc, adj, u_pad, node.w, scratch);
    }
  }
  return acc;
}

Operator HeatChannel::apply(const Operator& u, double* leakage) const {
  if (u.mat.rows() != n_ || u.mat.cols() != n_)
    throw DimensionMismatch("HeatChannel: operator must live on the working block");
  Matrix acc(n_pad_, n_pad_);
  Matrix scratch;
  for (const auto& node : nodes_) {
    la::sandwich_acc(acc, node.disp, u.mat, node.w, scratch);
    if (node.with_adjoint) {
      Matrix adj = node.disp.adjoint();
      la::sandwich_acc(acc, adj, u.mat, node.w, scratch);
    }
  }
  if (leakage) {
    double outside = 0.0, total = 0.0;
    for (int i = 0; i < n_pad_; ++i)
      for (int j = 0; j < n_pad_; ++j) {
        const double m = std::norm(acc(i, j));
        total += m;
        if (i >= n_ || j >= n_) outside += m;
      }
    *leakage = (total > 0.0) ? std::sqrt(outside / total) : 0.0;
  }
  return Operator(acc.block(n_, n_), u.hermitian, u.positive);
}

std::shared_ptr<const HeatChannel> ChannelCache::get(const ModelConfig& cfg, double width) {
  const Key key{std::llround(width * 1e9), cfg.n, cfg.n_pad, cfg.quad_order,
                std::llround(cfg.h * 1e9)};
  std::unique_lock<std::mutex> lock(mutex_);
  for (auto it = lru_.begin(); it != lru_.end(); ++it) {
    if (it->first == key) {
      lru_.splice(lru_.begin(), lru_, it);
      return lru_.front().second;
    }
  }
  lock.unlock();  // channel construction is slow; do not serialize it
  auto ch = std::make_shared<const HeatChannel>(cfg, width);
  lock.lock();
  lru_.emplace_front(key, ch);
  while (static_cast<int>(lru_.size()) > capacity_) lru_.pop_back();
  return ch;
}

Operator heat_apply(const ModelConfig& cfg, double t, const Operator& u, ChannelCache& cache,
                    LeakPolicy policy, double* leakage, double dt_max) {
  if (t <= 0.0) throw Error("heat_apply: t must be positive");
  const int steps = std::max(1, static_cast<int>(std::ceil(t / dt_max)));
  const double dt = t / steps;
  auto ch = cache.get(cfg, dt);
  Operator cur = u;
  double total_leak = 0.0;
  for (int s = 0; s < steps; ++s) {
    double leak = 0.0;
    cur = ch->apply(cur, &leak);
    total_leak += leak;
    if (policy == LeakPolicy::kStrict && leak > cfg.tol_leak)
      throw LeakageExceeded("heat_apply: leakage " + std::to_string(leak) +
                            " exceeds tolerance at t=" + std::to_string((s + 1) * dt));
  }
  if (leakage) *leakage = total_leak;
  return cur;
}

HeatFlow::HeatFlow(const ModelConfig& cfg, ChannelCache& cache, const Operator& u0)
    : cfg_(cfg), cache_(&cache) {
  state_ = (u0.mat.rows() == cfg.n_pad) ? u0.mat : u0.mat.padded(cfg.n_pad, cfg.n_pad);
}

void HeatFlow::advance_to(double t, double dt_max) {
  if (t < t_ - 1e-12) throw Error("HeatFlow: cannot evolve backwards");
  const double delta = t - t_;
  if (delta <= 1e-12) return;
  const int steps = std::max(1, static_cast<int>(std::ceil(delta / dt_max)));
  const double dt = delta / steps;
  auto ch = cache_->get(cfg_, dt);
  for (int s = 0; s < steps; ++s) state_ = ch->apply_padded(state_);
  t_ = t;
}

double HeatFlow::sup_norm() const {
  auto e = la::eigh(state_);
  return std::max(std::abs(e.values.front()), std::abs(e.values.back()));
}

namespace {

Matrix ladder_momentum(const LadderMatrices& lm, int n_pad) {
  Matrix p(n_pad, n_pad);
  for (int i = 0; i < n_pad; ++i)
    for (int j = 0; j < n_pad; ++j) p(i, j) = cplx(0.0, -1.0) * lm.dq(i, j);
  return p;
}

}  // namespace

Operator partial_derivative(const ModelConfig& cfg, int axis, const Operator& u) {
  cfg.validate();
  if (axis != 0 && axis != 1) throw Error("partial_derivative: axis must be 0 or 1");
  auto lm = ladder_matrices(cfg);
  const Matrix gen = (axis == 0) ? lm.q : ladder_momentum(lm, cfg.n_pad);
  const Matrix up = (u.mat.rows() == cfg.n_pad) ? u.mat : u.mat.padded(cfg.n_pad, cfg.n_pad);
  Matrix comm = matmul(gen, up) - matmul(up, gen);
  comm *= cplx(0.0, 1.0 / std::sqrt(cfg.h));
  return Operator(comm.block(u.mat.rows(), u.mat.cols()), false, false);
}

Operator laplacian_apply(const ModelConfig& cfg, const Operator& u) {
  cfg.validate();
  auto lm = ladder_matrices(cfg);
  const Matrix p = ladder_momentum(lm, cfg.n_pad);
  const Matrix up = (u.mat.rows() == cfg.n_pad) ? u.mat : u.mat.padded(cfg.n_pad, cfg.n_pad);
  auto dbl_comm = [&](const Matrix& g) {
    Matrix c1 = matmul(g, up) - matmul(up, g);
    return matmul(g, c1) - matmul(c1, g);
  };
  Matrix lap = dbl_comm(lm.q) + dbl_comm(p);
  lap *= cplx(1.0 / cfg.h, 0.0);
  return Operator(lap.block(u.mat.rows(), u.mat.cols()), u.hermitian, false);
}

std::vector<double> log_grid(double t_min, double t_max, int points) {
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i)
    g[i] = t_min * std::pow(t_max / t_min, points > 1 ? i / (points - 1.0) : 0.0);
  return g;
}

TauberianReport tauberian_functional(const ModelConfig& cfg, const Operator& u,
                                     const std::vector<double>& t_grid, ChannelCache& cache) {
  cfg.require_calibrated();
  if (t_grid.size() < 4) throw GridTooShort("tauberian_functional: need at least 4 grid points");
  std::vector<double> ts = t_grid;
  std::sort(ts.begin(), ts.end());

  TauberianReport rep;
  rep.tau_u = tau(cfg, u);
  HeatFlow flow(cfg, cache, u);
  for (double t : ts) {
    flow.advance_to(t);
    const double val = 4.0 * kPi * t * flow.sup_norm();  // (4 pi t)^{d/2} with d = 2
    rep.curve.emplace_back(t, val);
    rep.sup_value = std::max(rep.sup_value, val);
  }
  rep.trend = rep.curve.back().second;

  // Still rising at t_max: compare against the value half-way back.
  const double t_ref = ts.back() / 2.0;
  double v_ref = rep.curve.front().second;
  for (const auto& [t, v] : rep.curve)
    if (t <= t_ref) v_ref = v;
  if (v_ref > 0.0 && rep.trend / v_ref - 1.0 > 0.10)
    throw GridTooShort("tauberian_functional: functional still rising at t_max");
  return rep;
}

}  // namespace ncheat
