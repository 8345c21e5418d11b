#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ncheat/model.hpp"

namespace ncheat {

// Symbol of the power-difference transformer:
//   phi(lam, mu) = (lam^p - mu^p) / ((lam - mu)(lam^{p-1} + mu^{p-1}))
// on lam, mu > 0, with phi = 1 on the axes and the removable diagonal
// singularity filled with p/2.
struct PhiKernel {
  double p;
  double axis_floor = 1e-12;  // eigenvalues below axis_floor * scale count as zero
};

double phi_value(const PhiKernel& kernel, double lam, double mu);

// Off-axis part of the symbol in log-ratio coordinates:
//   phi(lam, mu) = 1 + psi_profile(p, log(lam/mu)) / 2.
// Schwartz-class for p > 1; the t = 0 value is the limit p - 2.
double psi_profile(double p, double t);

struct CpGrid {
  double extent = 40.0;  // sample on [-extent, extent)
  int samples = 1 << 14;
};

// Transformer norm bound c_p = 1 + (1/2) * L1 norm of the Fourier transform
// of psi_profile. Converged to 3 significant digits under grid doubling,
// else NotConverged.
double doi_constant(double p, const CpGrid& grid = {});

// Eigendecompositions of a Hermitian pair (A, B).
struct SpectralPair {
  std::vector<double> a_eigvals, b_eigvals;
  Matrix a_basis, b_basis;
};

SpectralPair make_spectral_pair(const Matrix& a, const Matrix& b);

// Double operator integral: multiply the matrix of X in the joint eigenbasis
// entrywise by phi(lambda_i, mu_j).
Matrix doi_apply(const SpectralPair& pair, const std::function<double(double, double)>& phi,
                 const Matrix& x);

// u^p by Borel functional calculus; round-off negatives clamped, rejects
// genuinely non-positive input. p = 0 gives the support projection.
Matrix matrix_power(const Matrix& u, double p);

struct NonlinearityReport {
  double p = 0.0, q = 0.0;
  int trials = 0;
  double c_p = 0.0;
  double max_identity_residual = 0.0;  // exact transformer identity, relative
  double max_transformer_ratio = 0.0;      // ||A^p-B^p||_q over ||A^{p-1}(A-B)+(A-B)B^{p-1}||_q
  double max_product_ratio = 0.0;      // ... over ||A-B||_{pq} (||A||_{pq}^{p-1}+||B||_{pq}^{p-1})
  double max_absvalue_ratio = 0.0;     // |A|,|B| variant on self-adjoint pairs, reported only
};

// Randomized verification of the power-difference bound on positive pairs.
// Throws BoundViolated (with the serialized pair) if a ratio exceeds c_p.
NonlinearityReport verify_nonlinearity(double p, double q, int trials, int dim, uint64_t seed);

std::string serialize_pair(double p, double q, uint64_t seed, const Matrix& a, const Matrix& b);

}  // namespace ncheat
