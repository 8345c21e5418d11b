#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ncheat/heat.hpp"
#include "ncheat/model.hpp"

namespace ncheat {

// Parameter algebra of the supercritical global-existence construction.
// Admissible auxiliary exponents form the open interval (max(p, r), p*r),
// nonempty exactly when p exceeds the Fujita exponent 1 + 2/d.
struct FujitaParams {
  int d = 0;
  double p = 0.0;
  double p_fujita = 0.0;
  double r = 0.0;             // d(p-1)/2
  double q = 0.0;
  double beta = 0.0;          // (d/2)(1/r - 1/q)
  double c_beta = 0.0;        // (4 pi)^{-d(p-1)/(2q)}
  double gamma_factor = 0.0;  // Gamma((p-1)b) Gamma(1-pb) / Gamma(1-b)

  // Largest M with alpha + c_beta * gamma_factor * M^p <= M (0 if none).
  double m_max(double alpha) const;
};

FujitaParams fujita_params(int d, double p);
FujitaParams fujita_params(int d, double p, double q);

enum class Scheme { kExpEuler, kMidpoint };

struct EvolutionState {
  double t = 0.0;
  Operator u;
  double dt = 0.0;
  Scheme scheme = Scheme::kMidpoint;
  bool overflowed = false;
};

// One step of the Duhamel discretization of du/dt = -Lap u + coeff * u^p.
// kExpEuler:  u+ = Heat_dt(u + dt coeff u^p)
// kMidpoint:  u+ = Heat_dt(u) + dt coeff Heat_{dt/2}(m^p),
//             m = Heat_{dt/2}(u) + (dt/2) coeff (Heat_{dt/2}(u))^p
// Exceeding the ceiling sets `overflowed` (a result, not an error).
EvolutionState duhamel_step(const ModelConfig& cfg, const EvolutionState& st, double dt, double p,
                            ChannelCache& cache, double ceiling, double coeff = 1.0);

struct PicardResult {
  double window = 0.0;
  std::vector<double> grid;
  std::vector<Operator> trajectory;
  std::vector<double> diffs;       // successive iterate sup-differences
  double worst_ratio = 0.0;
  int iterations = 0;
  double delta = 0.0;              // max(||u0||_q, ||u0||_inf)
  double c_p = 0.0;
};

// Fixed-point iteration of the mild-solution map on the contraction window
// T = (1/2) min(2^{-p} delta^{1-p} / c_p, 1).
PicardResult picard_window(const ModelConfig& cfg, const Operator& u0, double q, double p,
                           double tol, ChannelCache& cache, int grid_points = 24);

struct CertificateReport {
  double margin = 0.0;     // max over the grid of the functional minus threshold
  double threshold = 0.0;  // (p-1)^{-1/(p-1)}
  std::optional<double> violated_at;
  bool advisory = false;   // p outside (1,2): computed but not a certificate
  std::vector<std::pair<double, double>> curve;
};

// Necessary-condition certificate: a positive margin of
// t^{1/(p-1)} ||heat_t u0||_inf over (p-1)^{-1/(p-1)} rules out any
// nonnegative supersolution spanning the witnessed time.
CertificateReport blowup_certificate(const ModelConfig& cfg, const Operator& u0, double p,
                                     const std::vector<double>& t_grid, ChannelCache& cache);

// Same functional restarted from trajectory snapshots u(s1) over the
// remaining horizon; fires earlier than overflow on growing solutions.
struct MonitorEntry {
  double s1 = 0.0;
  CertificateReport cert;
};
std::vector<MonitorEntry> windowed_certificates(
    const ModelConfig& cfg, const std::vector<std::pair<double, Operator>>& snapshots, double p,
    double horizon, int grid_points, ChannelCache& cache);

enum class Outcome { kBlowUp, kGlobalCandidate, kUndecided };
const char* outcome_name(Outcome o);

struct SweepRecord {
  double p = 0.0, amplitude = 0.0;
  Outcome outcome = Outcome::kUndecided;
  double t_detect = 0.0;     // nan unless blow-up
  double max_uinf = 0.0;
  double cert_margin = 0.0;  // initial-data certificate margin
  double beta = 0.0, q = 0.0, r = 0.0;
  double decay_fit = 0.0;    // fitted decay exponent over the last decade
  double dt_final = 0.0;
  uint64_t cell_seed = 0;
  std::string reason;        // not serialized
  // classical-grid extras
  int grid_d = 0;
  double grid_box = 0.0;
  int grid_n = 0;
};

struct ClassifyThresholds {
  double ceiling_factor = 1e6;
  double dt0 = 0.05;
  double dt_max = 0.8;
  double q_override = 0.0;          // 0 = admissible-interval midpoint
  double decay_slope_tol = 0.05;    // slack on the non-increase of t^beta ||u||_q
  double mass_growth_tol = 0.05;    // trailing L1 growth allowed for a global candidate
  std::vector<double> cert_fracs = {0.0, 0.5};  // s1 as fractions of horizon (p in (1,2) only)
  int cert_grid_points = 12;
  double dt_safety = 0.25;          // dt <= safety * ||u||_inf^{1-p}
};

struct GaussianData {
  double amplitude = 1.0;
  double t0 = 0.5;
};

SweepRecord classify_cell(const ModelConfig& cfg, const GaussianData& u0_spec, double p,
                          double horizon, const ClassifyThresholds& thresholds, uint64_t cell_seed,
                          ChannelCache& cache);

std::vector<SweepRecord> fujita_sweep(const ModelConfig& cfg, const std::vector<double>& p_grid,
                                      const std::vector<double>& amplitude_grid, double horizon,
                                      uint64_t seed, const ClassifyThresholds& thresholds,
                                      int threads = 1);

std::string sweep_csv_header(bool classical_columns);
std::string sweep_csv_row(const SweepRecord& rec, bool classical_columns);
SweepRecord sweep_csv_parse_row(const std::string& line, bool classical_columns);

// Least-squares slope of log(y) against log(t); returns the decay exponent
// (positive = decaying).
double fit_decay_exponent(const std::vector<std::pair<double, double>>& curve, double t_lo,
                          double t_hi);

// Shared outcome logic for the matrix and grid backends.
struct ProbeSeries {
  std::vector<double> t, sup, qn, mass;
};
struct OutcomeInputs {
  ProbeSeries probes;
  bool overflowed = false;
  double t_overflow = 0.0;
  std::optional<double> cert_violation_t;
  double horizon = 0.0;
  double beta = 0.0;     // monitor exponent (d/2 scaling exponent when q is sup)
  bool use_q_norm = true;
};
void decide_outcome(const OutcomeInputs& in, const ClassifyThresholds& th, SweepRecord& rec);

}  // namespace ncheat
