#pragma once

#include <functional>
#include <vector>

#include "ncheat/la/matrix.hpp"

namespace ncheat::la {

// Spectral decomposition A = V diag(values) V^dagger of a Hermitian matrix.
// Eigenvalues ascending, eigenvectors in the columns of `vectors`.
struct EigResult {
  std::vector<double> values;
  Matrix vectors;
};

// Cyclic Jacobi for complex Hermitian matrices. Input is symmetrized first,
// so mildly non-Hermitian round-off input is fine.
EigResult eigh(const Matrix& A);

Matrix hermitize(const Matrix& A);

// V f(diag) V^dagger
Matrix apply_spectral(const EigResult& e, const std::function<double(double)>& f);

double min_eigenvalue(const Matrix& A);

}  // namespace ncheat::la
