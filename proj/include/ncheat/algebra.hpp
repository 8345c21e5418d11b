#pragma once

#include <array>
#include <functional>
#include <vector>

#include "ncheat/model.hpp"

namespace ncheat {

using Vec2 = std::array<double, 2>;

// Values of the orthonormal Hermite functions h_0..h_{nmax-1} at x.
std::vector<double> hermite_values(int nmax, double x);

struct LadderMatrices {
  Matrix q;   // position, real symmetric tridiagonal
  Matrix dq;  // d/ds, real antisymmetric tridiagonal
};

// Dimensionless Hermite-recurrence matrices at the padded dimension.
LadderMatrices ladder_matrices(const ModelConfig& cfg);

// Displacement unitary W(zeta) on the padded block. Satisfies the Weyl
// relation W(t)W(s) = exp(i/2 (t, theta s)) W(t+s) with theta = h*[[0,-1],[1,0]].
Matrix weyl_operator(const ModelConfig& cfg, const Vec2& zeta);

// Dimensionless kernel behind weyl_operator: matrix of
// f(s) -> e^{i b (s - a/2)} f(s - a) in the Hermite basis. W(zeta) is this
// at (a, b) = sqrt(h) * zeta. Exposed for quadrature assemblies.
Matrix weyl_matrix(int dim, double a, double b, int quad_order);
int weyl_quad_order(int dim, double b);

// Unitarity defect of W on the working block (max-abs of W^*W - I there).
double weyl_unitarity_defect(const ModelConfig& cfg, const Matrix& w);

// Quantization of an integrable symbol: integral of f(zeta) W(zeta) over
// [-support_radius, support_radius]^2 by tensor Gauss-Legendre quadrature.
// gl_order = 0 picks a default from the support radius.
Operator lambda_theta(const ModelConfig& cfg, const std::function<cplx(double, double)>& f,
                      double support_radius, int gl_order = 0);

// Phase-space translation T_s, realized as conjugation by a displacement.
Operator translate(const ModelConfig& cfg, const Vec2& s, const Operator& x);

// Inner displacement vector used by translate: a = J s / h.
Vec2 translation_vector(const ModelConfig& cfg, const Vec2& s);

// Fixes c_tau from the unit-time Gaussian operator; checks stability of the
// calibration across a few times and throws CalibrationUnstable on drift.
double calibrate_trace(const ModelConfig& cfg);
ModelConfig calibrate(ModelConfig cfg);

}  // namespace ncheat
