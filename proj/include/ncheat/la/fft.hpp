#pragma once

#include <complex>
#include <vector>

namespace ncheat::la {

// In-place radix-2 FFT, length must be a power of two.
// Forward: X_k = sum_j x_j e^{-2*pi*i*jk/n}; inverse includes the 1/n factor.
void fft(std::vector<std::complex<double>>& a, bool inverse);

bool is_pow2(int n);

}  // namespace ncheat::la
