#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ncheat/model.hpp"

namespace ncheat {

// Completely positive map given by a Kraus family, Phi(x) = sum K_i x K_i^*.
struct CPMap {
  std::vector<Matrix> kraus;
  bool unital = false;            // sum K_i K_i^* = I
  bool trace_preserving = false;  // sum K_i^* K_i = I

  Matrix apply(const Matrix& x) const;
  void validate_flags(double tol = 1e-10);
};

// Random unital CP map: Gaussian Kraus family, normalized so the unitality
// defect is at round-off level. n_kraus = 1 degenerates to a unitary
// conjugation.
CPMap random_unital_cp(int dim, int n_kraus, uint64_t seed);

// Min eigenvalue of Phi(u^p) - Phi(u)^p, the operator Jensen gap; must not be
// significantly negative for 1 <= p <= 2.
double jensen_gap(const CPMap& phi, const Matrix& u, double p);

// Positivity of [[A, B], [B^*, C]] checked two ways: block eigensolve and the
// complement C - B^* A^{-1} B. Asserts the two agree; A must be safely
// invertible.
bool schur_positive(const Matrix& a, const Matrix& b, const Matrix& c);

// Relative error of the integral representation of x^p against the
// functional-calculus power, 1 < p < 2. Substitutes t = e^s with the
// truncation range widened as p approaches either endpoint.
double power_integral_check(const Matrix& x, double p, int quad_nodes = 0);

std::string serialize_jensen_case(const CPMap& phi, const Matrix& u, double p, uint64_t seed);

}  // namespace ncheat
