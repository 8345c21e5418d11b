#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "ncheat/la/matrix.hpp"

namespace ncheat {

// splitmix64: tiny, seedable, platform-independent. Used everywhere a test
// or experiment needs reproducible random data, so CSV bodies are stable
// across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform in (0, 1]
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  la::cplx normal_cplx() {
    const double re = normal();
    const double im = normal();
    return {re, im};
  }

  la::Matrix gaussian_matrix(int rows, int cols) {
    la::Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = normal_cplx();
    return m;
  }

  // A = X X^* / dim for an i.i.d. complex Gaussian X: positive, generic
  // full-rank spectrum.
  la::Matrix random_positive(int dim) {
    la::Matrix x = gaussian_matrix(dim, dim);
    la::Matrix a = la::matmul(x, x.adjoint());
    return a * (1.0 / dim);
  }

  static uint64_t derive(uint64_t master, uint64_t index) {
    return master + 0x9E3779B97F4A7C15ull * (index + 1);
  }

 private:
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ncheat
