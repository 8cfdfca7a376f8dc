// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stablebranch/analytic.hpp"
#include "stablebranch/simulator.hpp"

namespace stablebranch {

/// One Monte Carlo estimate compared against its analytic reference.
struct EstimateReport {
  std::string quantity;
  double t = 0.0;
  double arg = 0.0;  // s for pgf estimates, lambda for Laplace estimates
  double mc_estimate = 0.0;
  double std_error = 0.0;
  double analytic_value = 0.0;
  double z_score = 0.0;
  std::int64_t n_replicates = 0;
  double abort_fraction = 0.0;
  double truncation_bias_bound = 0.0;
  /// Limit transform value for Laplace rows, NaN elsewhere.
  double limit_value = 0.0;
  bool flagged = false;  // abort fraction above 1%
};

/// One deterministic check of a closed form against an independent oracle.
struct OracleReport {
  std::string formula;
  double t = 0.0;
  double arg = 0.0;
  double closed_form = 0.0;
  double oracle_value = 0.0;
  double abs_diff = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

OracleReport make_oracle_report(std::string formula, double t, double arg, double closed_form,
                                double oracle_value, double tolerance);

struct EstimatorOptions {
  int workers = 1;
  /// Stop trajectories once the population makes every requested estimand
  /// numerically pinned (error below 1e-18 per replicate); see SimConfig.
  bool early_resolve = true;
};

/// Population level above which all estimands with pgf argument <= s_max are
/// determined to within 1e-18: the conditional value of s^Y(t) given m alive
/// is at most F(t, s_max)^m.  Returns 0 (disabled) if no useful level exists.
std::int64_t early_resolve_level(double t, double s_max, const ModelParams& params);

/// Sample mean and standard error of s^(terminal population) over n
/// replicates at horizon t, one report per entry of s_values, all computed
/// from a single replicate set.  s = 0 entries estimate the extinction
/// frequency.  Aborted trajectories are excluded and reported.
std::vector<EstimateReport> estimate_pgf_multi(Process process, double t,
                                               const std::vector<double>& s_values,
                                               std::int64_t n, const SimConfig& base,
                                               const EstimatorOptions& options = {});
EstimateReport estimate_pgf(Process process, double t, double s, std::int64_t n,
                            const SimConfig& base, const EstimatorOptions& options = {});

/// Sample mean of exp(-lambda z(t) Y(t)) against the finite-time transform,
/// with the limit transform attached for reference.
std::vector<EstimateReport> estimate_laplace_multi(const RegimeLimit& limit, double t,
                                                   const std::vector<double>& lambdas,
                                                   std::int64_t n, const SimConfig& base,
                                                   const EstimatorOptions& options = {});
EstimateReport estimate_laplace(const RegimeLimit& limit, double t, double lambda,
                                std::int64_t n, const SimConfig& base,
                                const EstimatorOptions& options = {});

/// Adaptive high-order integration of the backward equation
/// dF/dt = K (1 - F)^(1+beta) / (1+beta) from F(0) = s.
double ode_oracle_single_pgf(double t, double s, const ModelParams& params,
                             double tol = 1e-13);

/// Adaptive Gauss-Kronrod evaluation of exp{-theta int_0^t (1 - F(u,s))^gamma du}
/// using the closed-form F.
double quadrature_oracle_immigration_pgf(double t, double s, const ModelParams& params,
                                         double tol = 1e-12);

struct SuiteConfig {
  std::uint64_t seed = 42;
  int workers = 1;
  std::int64_t replicates = 20'000;
  bool include_monte_carlo = true;
};

struct SuiteResult {
  std::vector<OracleReport> oracles;
  std::vector<EstimateReport> estimates;
  int oracle_failures = 0;
  int estimate_exceedances = 0;  // |z| > 4
  double exceedance_fraction = 0.0;
  bool pass = false;  // no oracle failures and exceedance fraction <= 2%
};

/// Runs the default grid of oracle and Monte Carlo checks.  Every closed-form
/// operation of the analytic module appears under at least one formula label
/// (enforced), and all five limit cases are covered.
SuiteResult run_verification_suite(const SuiteConfig& config);

/// Shortest round-trip decimal rendering (used by all report writers so
/// identical runs produce byte-identical files).
std::string format_double(double value);

void write_oracles_csv(std::ostream& out, const std::vector<OracleReport>& oracles);
void write_estimates_csv(std::ostream& out, const std::vector<EstimateReport>& estimates);
/// Line-delimited records: one JSON object per report plus a trailing summary.
void write_records(std::ostream& out, const SuiteResult& result);

}  // namespace stablebranch
