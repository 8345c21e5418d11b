#include "ncheat/la/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "ncheat/la/eig.hpp"
#include "ncheat/la/matrix.hpp"

namespace ncheat::la {

std::vector<double> hermite_values(int nmax, double x) {
  std::vector<double> h(nmax);
  if (nmax == 0) return h;
  const double h0 = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
  h[0] = h0;
  if (nmax > 1) h[1] = std::sqrt(2.0) * x * h0;
  for (int n = 1; n + 1 < nmax; ++n)
    h[n + 1] = std::sqrt(2.0 / (n + 1.0)) * x * h[n] - std::sqrt(n / (n + 1.0)) * h[n - 1];
  return h;
}

namespace {

std::mutex cache_mutex;

Quadrature compute_gauss_hermite(int n) {
  // Nodes from the Jacobi matrix of the Hermite weight. Weights through the
  // Christoffel function: w_i e^{x_i^2} = 1 / sum_k h_k(x_i)^2, which stays
  // fully accurate where the eigenvector route loses the extreme nodes to
  // round-off.
  Matrix J(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(k / 2.0);
    J(k - 1, k) = b;
    J(k, k - 1) = b;
  }
  auto e = eigh(J);
  Quadrature q;
  q.x = e.values;
  q.w.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto h = hermite_values(n, q.x[i]);
    double s = 0.0;
    for (double v : h) s += v * v;
    q.w[i] = std::exp(-q.x[i] * q.x[i]) / s;
  }
  return q;
}

Quadrature compute_gauss_legendre(int n) {
  Quadrature q;
  q.x.resize(n);
  q.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.x[i] = -x;
    q.x[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.w[i] = w;
    q.w[n - 1 - i] = w;
  }
  return q;
}

}  // namespace

const Quadrature& gauss_hermite(int order) {
  if (order < 1) throw std::invalid_argument("gauss_hermite: order < 1");
  static std::map<int, Quadrature> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gauss_hermite(order)).first;
  return it->second;
}

const Quadrature& gauss_hermite_compensated(int order) {
  static std::map<int, Quadrature> cache;
  const Quadrature& base = gauss_hermite(order);
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(order);
  if (it == cache.end()) {
    Quadrature q;
    q.x = base.x;
    q.w.resize(order);
    for (int i = 0; i < order; ++i) {
      const auto h = hermite_values(order, base.x[i]);
      double s = 0.0;
      for (double v : h) s += v * v;
      q.w[i] = 1.0 / s;
    }
    it = cache.emplace(order, std::move(q)).first;
  }
  return it->second;
}

const Quadrature& gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order < 1");
  static std::map<int, Quadrature> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
  return it->second;
}

Quadrature gauss_legendre_on(int order, double a, double b) {
  const Quadrature& base = gauss_legendre(order);
  Quadrature q = base;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < order; ++i) {
    q.x[i] = mid + half * base.x[i];
    q.w[i] = half * base.w[i];
  }
  return q;
}

}  // namespace ncheat::la
