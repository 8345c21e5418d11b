#pragma once

#include <array>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <vector>

#include "ncheat/model.hpp"

namespace ncheat {

// tau_theta of an operator on the working block (or padded block).
double tau(const ModelConfig& cfg, const Operator& u);

// Gaussian operator at time t: quantization of the Gaussian multiplier,
// positive and trace-normalized to 1/c_tau on the matrix trace.
Operator gaussian_operator(const ModelConfig& cfg, double t);

// Closed-form eigenvalues of the Gaussian operator in the oscillator basis:
// geometric weights (2 pi h)^{-1} (1-w) w^n with w = (4t-h)/(4t+h). Derived
// from the Mehler kernel; used as an independent oracle in tests.
std::vector<double> gaussian_thermal_eigs(const ModelConfig& cfg, double t, int count);

// One heat step as a Gaussian-weighted average of displacement conjugations.
// Nodes come from tensor Gauss-Hermite quadrature of the heat kernel; the
// +/- symmetry is exploited so only half the displacements are stored.
class HeatChannel {
 public:
  HeatChannel(const ModelConfig& cfg, double width);

  double width() const { return width_; }
  double weight_sum() const { return weight_sum_; }

  // Padded state in, padded state out.
  Matrix apply_padded(const Matrix& u_pad) const;

  // Working-block state in; output projected back with leakage reported
  // (Frobenius mass outside the block over total).
  Operator apply(const Operator& u, double* leakage) const;

 private:
  struct Node {
    double w;
    Matrix disp;
    bool with_adjoint;  // add the mirrored node via the adjoint displacement
  };
  int n_, n_pad_;
  double width_;
  double weight_sum_;
  std::vector<Node> nodes_;
};

// LRU cache of heat channels keyed on width and the config fingerprint.
class ChannelCache {
 public:
  explicit ChannelCache(int capacity = 4) : capacity_(capacity) {}
  std::shared_ptr<const HeatChannel> get(const ModelConfig& cfg, double width);

 private:
  using Key = std::array<long long, 5>;  // width, n, n_pad, quad_order, h
  int capacity_;
  std::mutex mutex_;
  std::list<std::pair<Key, std::shared_ptr<const HeatChannel>>> lru_;
};

enum class LeakPolicy { kStrict, kRecord };

// e^{-t Laplacian} u. Times above dt_max are composed from equal sub-steps.
Operator heat_apply(const ModelConfig& cfg, double t, const Operator& u, ChannelCache& cache,
                    LeakPolicy policy = LeakPolicy::kStrict, double* leakage = nullptr,
                    double dt_max = 1.0);

// Incremental heat evolution kept at the padded dimension (no intermediate
// projection), for functionals probed along a time grid.
class HeatFlow {
 public:
  HeatFlow(const ModelConfig& cfg, ChannelCache& cache, const Operator& u0);
  void advance_to(double t, double dt_max = 1.0);
  double t() const { return t_; }
  const Matrix& state() const { return state_; }
  double sup_norm() const;  // operator norm of the padded state

 private:
  const ModelConfig cfg_;
  ChannelCache* cache_;
  Matrix state_;
  double t_ = 0.0;
};

// Derivation along axis j (0 or 1) as a scaled ladder commutator; the
// scaling is pinned by the symbol identity d_j lambda(f) = lambda(i t_j f).
Operator partial_derivative(const ModelConfig& cfg, int axis, const Operator& u);

// Laplacian as scaled double commutators with the ladder matrices. Exact on
// working-block data whenever n_pad >= n + 2.
Operator laplacian_apply(const ModelConfig& cfg, const Operator& u);

struct TauberianReport {
  double sup_value = 0.0;   // max over the grid of (4 pi t)^{d/2} ||heat_t u||_inf
  double trend = 0.0;       // value at the last grid point
  double tau_u = 0.0;       // calibrated trace of u, for comparison
  std::vector<std::pair<double, double>> curve;
};

// Scaled sup-functional whose limit recovers the trace of positive data.
// Throws GridTooShort when the functional is still visibly rising at t_max.
TauberianReport tauberian_functional(const ModelConfig& cfg, const Operator& u,
                                     const std::vector<double>& t_grid, ChannelCache& cache);

std::vector<double> log_grid(double t_min, double t_max, int points);

}  // namespace ncheat
