#pragma once

#include <vector>

namespace ncheat::la {

struct Quadrature {
  std::vector<double> x;
  std::vector<double> w;
};

// Orthonormal Hermite function values h_0..h_{nmax-1} at x.
std::vector<double> hermite_values(int nmax, double x);

// Nodes/weights for \int e^{-x^2} f(x) dx = sum w_i f(x_i). Cached per order.
const Quadrature& gauss_hermite(int order);

// Gauss-Hermite with the weight factored back in: sum cw_i g(x_i) for
// \int g(x) dx of integrands carrying their own e^{-x^2} decay; cw = w e^{x^2}.
const Quadrature& gauss_hermite_compensated(int order);

// Nodes/weights on [-1, 1].
const Quadrature& gauss_legendre(int order);

// Affine image of gauss_legendre on [a, b].
Quadrature gauss_legendre_on(int order, double a, double b);

}  // namespace ncheat::la
