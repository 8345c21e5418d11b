#pragma once

#include <vector>

#include "ncheat/model.hpp"

namespace ncheat {

// Step-function representation of the generalized singular value function:
// mu(t) = values[k] on [k*weight, (k+1)*weight), weight = c_tau.
struct SingularProfile {
  std::vector<double> values;  // descending, >= 0
  double weight = 0.0;

  double mu(double t) const;
  // distribution function: weight * #{k : values[k] > s}
  double n(double s) const;
};

SingularProfile singular_profile(const ModelConfig& cfg, const Operator& x);

// Weighted Schatten norm; p = infinity() gives the operator norm.
double lp_norm(const ModelConfig& cfg, const Operator& x, double p);
double lp_norm(const SingularProfile& prof, double p);

// ||xy||_r - ||x||_p ||y||_q for 1/r = 1/p + 1/q; never significantly positive.
double holder_defect(const ModelConfig& cfg, const Operator& x, const Operator& y, double p,
                     double q, double r);

}  // namespace ncheat
