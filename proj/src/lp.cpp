#include "ncheat/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ncheat {

double SingularProfile::mu(double t) const {
  if (t < 0.0) throw Error("SingularProfile::mu: t must be nonnegative");
  const size_t k = static_cast<size_t>(t / weight);
  return k < values.size() ? values[k] : 0.0;
}

double SingularProfile::n(double s) const {
  size_t count = 0;
  for (double v : values) {
    if (v > s) ++count;
    else break;  // descending
  }
  return weight * count;
}

SingularProfile singular_profile(const ModelConfig& cfg, const Operator& x) {
  cfg.require_calibrated();
  // Eigenvalues of |x| through x^* x; round-off negatives clamp to zero.
  Matrix g = matmul(x.mat.adjoint(), x.mat);
  auto e = la::eigh(g);
  SingularProfile prof;
  prof.weight = cfg.c_tau;
  prof.values.resize(e.values.size());
  for (size_t i = 0; i < e.values.size(); ++i) {
    const double v = e.values[e.values.size() - 1 - i];
    prof.values[i] = v > 0.0 ? std::sqrt(v) : 0.0;
  }
  return prof;
}

double lp_norm(const SingularProfile& prof, double p) {
  if (std::isinf(p)) return prof.values.empty() ? 0.0 : prof.values.front();
  if (p < 1.0) throw InvalidExponent("lp_norm: p must be >= 1");
  double s = 0.0;
  for (double v : prof.values) s += std::pow(v, p);
  return std::pow(prof.weight * s, 1.0 / p);
}

double lp_norm(const ModelConfig& cfg, const Operator& x, double p) {
  return lp_norm(singular_profile(cfg, x), p);
}

double holder_defect(const ModelConfig& cfg, const Operator& x, const Operator& y, double p,
                     double q, double r) {
  auto inv = [](double e) { return std::isinf(e) ? 0.0 : 1.0 / e; };
  if (std::abs(inv(r) - inv(p) - inv(q)) > 1e-12)
    throw ExponentMismatch("holder_defect: need 1/r = 1/p + 1/q");
  Operator xy(matmul(x.mat, y.mat));
  return lp_norm(cfg, xy, r) - lp_norm(cfg, x, p) * lp_norm(cfg, y, q);
}

}  // namespace ncheat
