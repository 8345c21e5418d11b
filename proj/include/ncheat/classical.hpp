#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ncheat/evolve.hpp"

namespace ncheat {

// Nonnegative field sampled on a periodic box [-box, box)^d approximating
// free space; the spectral heat multiplier is exact on the grid.
struct GridField {
  int d = 1;
  double box = 40.0;
  int n = 2048;  // points per axis, power of two
  std::vector<double> v;

  double dx() const { return 2.0 * box / n; }
  size_t size() const { return v.size(); }
  double cell_volume() const;
  double mass() const;
  double sup() const;
  double lq_norm(double q) const;
  // Fraction of mass outside |x|_inf <= box/2.
  double boundary_mass_fraction() const;
};

GridField make_grid_field(int d, double box, int n,
                          const std::function<double(const std::vector<double>&)>& f);

// amplitude * G_{t0} sampled on the grid.
GridField gaussian_bump(int d, double box, int n, double amplitude, double t0);

// Fourier multiplier e^{-t |k|^2}; throws BoxTooSmall when boundary mass is
// above 1e-8 of the total.
GridField heat_apply_classical(const GridField& field, double t);

// Same certificate functional as the matrix model, with the exact spectral
// semigroup.
CertificateReport blowup_certificate_classical(const GridField& u0, double p,
                                               const std::vector<double>& t_grid);

// Bisected amplitude at which the certificate margin crosses zero for the
// data family amplitude * shape.
double critical_certificate_amplitude(const GridField& shape, double p,
                                      const std::vector<double>& t_grid, double hi_start = 1.0);

struct ClassicalTrajectory {
  std::vector<double> t;
  std::vector<GridField> snapshots;  // sparse, for certificate monitors
  ProbeSeries probes;
  bool overflowed = false;
  double t_end = 0.0;
};

// Same Duhamel schemes as the operator model with the pointwise power
// nonlinearity; expanding-box retries are handled by the classifier.
SweepRecord evolve_classical(const GridField& u0, double p, double horizon,
                             const ClassifyThresholds& thresholds, uint64_t cell_seed,
                             ClassicalTrajectory* trajectory_out = nullptr);

std::vector<SweepRecord> fujita_sweep_classical(int d, double box, int n,
                                                const std::vector<double>& p_grid,
                                                const std::vector<double>& amplitude_grid,
                                                double horizon, uint64_t seed,
                                                const ClassifyThresholds& thresholds,
                                                int threads = 1, double t0 = 1.0);

}  // namespace ncheat
