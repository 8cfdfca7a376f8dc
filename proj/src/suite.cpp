// SPDX-License-Identifier: Apache-2.0
#include <json.hpp>

#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "stablebranch/verify.hpp"

namespace stablebranch {

namespace {

// Default parameter sets: beta = 0.5 gives A = 3 exactly at K = 1, and the
// three gammas hit all three tail orderings.
const double kBetaDefault = 0.5;
const double kGammas[] = {0.25, 0.5, 0.75};

ModelParams params_with(double beta, double gamma, double k_rate = 1.0, double theta = 1.0) {
  ModelParams p;
  p.beta = beta;
  p.gamma = gamma;
  p.lifetime_rate = k_rate;
  p.theta = theta;
  return p;
}

void add(std::vector<OracleReport>& rows, std::string formula, double t, double arg,
         double closed, double oracle, double tol) {
  rows.push_back(make_oracle_report(std::move(formula), t, arg, closed, oracle, tol));
}

// Boolean property expressed as an oracle row.
void add_flag(std::vector<OracleReport>& rows, std::string formula, double t, double arg,
              bool holds) {
  rows.push_back(make_oracle_report(std::move(formula), t, arg, holds ? 1.0 : 0.0, 1.0, 0.0));
}

void check_single_pgf(std::vector<OracleReport>& rows) {
  const double ts[] = {0.1, 1.0, 10.0, 100.0};
  const double ss[] = {0.0, 0.25, 0.5, 0.75, 0.95};
  for (const auto& p : {params_with(0.5, 0.5, 1.0), params_with(1.0, 1.0, 2.0)}) {
    for (double t : ts) {
      for (double s : ss) {
        add(rows, "pgf_single_ancestor", t, s, pgf_single_ancestor(t, s, p),
            ode_oracle_single_pgf(t, s, p), 1e-10);
      }
    }
  }
}

void check_b_factor(std::vector<OracleReport>& rows) {
  const ModelParams p = params_with(0.5, 0.5);  // A = 3
  add(rows, "b_factor", 0.0, 0.37, b_factor(0.0, 0.37, p), 1.0, 0.0);
  add(rows, "b_factor", p.time_scale(), 0.0, b_factor(p.time_scale(), 0.0, p), 2.0, 1e-14);
  add(rows, "b_factor", 3.0, 0.5, b_factor(3.0, 0.5, p), 1.0 + std::sqrt(0.5), 1e-14);
}

void check_immigration_pgf(std::vector<OracleReport>& rows) {
  const double ts[] = {0.1, 1.0, 10.0};
  const double ss[] = {0.0, 0.5, 0.95};
  for (double gamma : kGammas) {
    for (double theta : {0.5, 2.0}) {
      const ModelParams p = params_with(kBetaDefault, gamma, 1.0, theta);
      for (double t : ts) {
        for (double s : ss) {
          add(rows, "pgf_immigration", t, s, pgf_immigration(t, s, p),
              quadrature_oracle_immigration_pgf(t, s, p), 1e-9);
        }
      }
    }
  }
}

void check_series(std::vector<OracleReport>& rows) {
  const double s = 0.5;
  for (double gamma : kGammas) {
    const ModelParams p = params_with(kBetaDefault, gamma);
    for (double x : {0.3, 0.6, 0.9}) {
      const double t = x * p.time_scale() / std::pow(1.0 - s, p.beta);
      add(rows, "pgf_immigration_series", t, s, pgf_immigration_series_auto(t, s, p),
          pgf_immigration(t, s, p), 1e-10);
    }
    // Order 1 is the pure discrete-stable approximation.
    const double t1 = 0.5 * p.time_scale();
    add(rows, "pgf_immigration_series", t1, s, pgf_immigration_series(t1, s, p, 1),
        std::exp(-p.theta * t1 * std::pow(1.0 - s, p.gamma)), 1e-14);
  }
}

void check_factorials(std::vector<OracleReport>& rows) {
  for (double delta : {0.5, 1.0, 2.0}) {
    for (int j : {1, 3, 7}) {
      const FactorialIdentity identity = factorial_identity(delta, j);
      const double tol = 1e-12 * std::max(1.0, std::fabs(identity.falling));
      add(rows, "factorial_identity", delta, j, identity.falling, identity.via_falling_neg,
          tol);
      add(rows, "factorial_identity", delta, j, identity.falling, identity.via_rising, tol);
    }
  }
}

void check_extinction(std::vector<OracleReport>& rows) {
  const ModelParams p = params_with(0.5, 0.5);  // A = 3
  const double a = p.time_scale();
  add(rows, "extinction_single", a, 0.0, extinction_prob_single(a, p), 0.75, 1e-14);
  for (double t : {0.5, 5.0, 50.0}) {
    add(rows, "extinction_single", t, 0.0, extinction_prob_single(t, p),
        pgf_single_ancestor(t, 0.0, p), 1e-15);
  }
  // beta = gamma: Phi(A + A + A, 0) = (1/2)^(theta A) at t = 3A... t = 3 gives
  // B(3, 0) = 2, hence 2^-3 = 0.125.
  add(rows, "extinction_immigration", 3.0, 0.0, extinction_prob_immigration(3.0, p), 0.125,
      1e-14);
  for (double gamma : kGammas) {
    const ModelParams q = params_with(kBetaDefault, gamma);
    add(rows, "extinction_immigration", 2.0, 0.0, extinction_prob_immigration(2.0, q),
        pgf_immigration(2.0, 0.0, q), 0.0);
    add(rows, "extinction_immigration", 2.0, 0.0, extinction_prob_immigration(2.0, q),
        quadrature_oracle_immigration_pgf(2.0, 0.0, q), 1e-9);
  }
}

void check_generators(std::vector<OracleReport>& rows) {
  const double s = 0.5;
  for (double gamma : kGammas) {
    const ModelParams p = params_with(kBetaDefault, gamma, 2.0, 1.5);
    // K (h(s) - s) with h rebuilt from the offspring mass series.
    double h = 0.0;
    double s_pow = 1.0;
    for (int k = 0; k <= 400; ++k) {
      h += offspring_pmf(k, p.beta) * s_pow;
      s_pow *= s;
    }
    add(rows, "reproduction_generator", 0.0, s, reproduction_generator(s, p),
        p.lifetime_rate * (h - s), 1e-12);
    add(rows, "reproduction_generator", 0.0, s, reproduction_generator(s, p),
        reproduction_generator_scaled(s, p), 1e-15);
    // theta (1 - g(s)) with g rebuilt from the batch mass series.
    double g = 0.0;
    s_pow = s;
    for (int k = 1; k <= 400; ++k) {
      g += sibuya_pmf(k, p.gamma) * s_pow;
      s_pow *= s;
    }
    add(rows, "immigration_generator", 0.0, s, immigration_generator(s, p),
        p.theta * (1.0 - g), 1e-12);
  }
  const ModelParams p = params_with(0.5, 0.5);
  add(rows, "reproduction_generator", 0.0, 1.0, reproduction_generator(1.0, p), 0.0, 0.0);
  add(rows, "immigration_generator", 0.0, 1.0, immigration_generator(1.0, p), 0.0, 0.0);
  add(rows, "immigration_generator", 0.0, 0.0, immigration_generator(0.0, p), p.theta, 0.0);
}

void check_pde(std::vector<OracleReport>& rows) {
  const double step = 1e-4;
  for (double gamma : kGammas) {
    const ModelParams p = params_with(kBetaDefault, gamma);
    for (auto [t, s] : {std::pair{1.0, 0.5}, std::pair{2.0, 0.3}}) {
      const double coarse = pde_residual(t, s, p, step);
      const double fine = pde_residual(t, s, p, step / 2.0);
      add(rows, "pde_residual", t, s, std::fabs(coarse), 0.0, 1e-6);
      // Second-order differences: halving the step divides the residual by ~4.
      add(rows, "pde_residual_order", t, s, std::fabs(coarse) / std::fabs(fine), 4.0, 0.5);
    }
    add(rows, "pde_residual", 1.0, 1.0, pde_residual(1.0, 1.0, p, step), 0.0, 0.0);
  }
}

void check_normalization(std::vector<OracleReport>& rows) {
  const ModelParams p = params_with(0.5, 0.5);
  const double a = p.time_scale();
  add(rows, "normalization_scale", a, 0.5, normalization_scale(a, 0.5, p), 1.0, 1e-14);
  add(rows, "normalization_scale", 4.0 * a, 0.5, normalization_scale(4.0 * a, 0.5, p),
      1.0 / 16.0, 1e-14);
  bool decreasing = true;
  double prev = normalization_scale(1.0, p.beta, p);
  for (double t : {2.0, 8.0, 64.0, 512.0}) {
    const double z = normalization_scale(t, p.beta, p);
    decreasing = decreasing && z < prev;
    prev = z;
  }
  add_flag(rows, "normalization_scale_decreasing", 0.0, 0.0, decreasing);
}

void check_laplace_analytic(std::vector<OracleReport>& rows) {
  // Finite transform is Phi at the substituted argument by construction.
  const ModelParams p1 = params_with(0.5, 0.5);
  const RegimeLimit case1 = make_regime_limit(1, p1);
  const double t = 10.0 * p1.time_scale();
  const double z = normalization_scale(t, case1.normalization_exponent, p1);
  add(rows, "finite_laplace", t, 1.0, finite_laplace(t, 1.0, case1, p1),
      pgf_immigration(t, std::exp(-z), p1), 1e-12);
  add(rows, "finite_laplace", t, 0.0, finite_laplace(t, 0.0, case1, p1), 1.0, 0.0);
  bool decreasing = true;
  double prev = 1.0;
  for (double lambda : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const double value = finite_laplace(t, lambda, case1, p1);
    decreasing = decreasing && value < prev;
    prev = value;
  }
  add_flag(rows, "finite_laplace_decreasing", t, 0.0, decreasing);

  // Point values of the limit transforms.
  add(rows, "limit_laplace", 0.0, 1.0, limit_laplace(1.0, case1, p1), 0.125, 1e-14);
  const ModelParams p2 = params_with(0.5, 0.25);
  add(rows, "limit_laplace", 0.0, 0.0, limit_laplace(0.0, make_regime_limit(2, p2), p2), 1.0,
      0.0);
  add(rows, "limit_laplace", 0.0, 1.0, limit_laplace(1.0, make_regime_limit(3, p2), p2), 0.0,
      0.0);
  const ModelParams p45 = params_with(0.5, 1.0, 1.0, 0.3);
  add(rows, "limit_laplace", 0.0, 1.0, limit_laplace(1.0, make_regime_limit(4, p45), p45), 1.0,
      0.0);
  add(rows, "limit_laplace", 0.0, 1.0, limit_laplace(1.0, make_regime_limit(5, p45), p45), 1.0,
      0.0);

  // Convergence of the finite transform to its limit.  Cases 1 and 2: the
  // sup gap over the lambda grid shrinks along t and is < 0.01 at t = 1e4 A.
  const double lambdas[] = {0.5, 1.0, 2.0};
  for (int case_id : {1, 2}) {
    const ModelParams& p = case_id == 1 ? p1 : p2;
    const RegimeLimit limit = make_regime_limit(case_id, p);
    const std::string label = "laplace_case" + std::to_string(case_id);
    double prev_gap = 2.0;
    bool monotone = true;
    double final_gap = 0.0;
    for (double mult : {1e2, 1e3, 1e4}) {
      const double horizon = mult * p.time_scale();
      double gap = 0.0;
      for (double lambda : lambdas) {
        gap = std::max(gap, std::fabs(finite_laplace(horizon, lambda, limit, p) -
                                      limit_laplace(lambda, limit, p)));
      }
      monotone = monotone && gap < prev_gap;
      prev_gap = gap;
      final_gap = gap;
    }
    add_flag(rows, label + "_gap_monotone", 0.0, 0.0, monotone);
    add(rows, label + "_gap", 1e4 * p.time_scale(), 0.0, final_gap, 0.0, 0.01);
  }
  // Degenerate cases, checked as one-sided bounds at t = 1e4 A.
  {
    const RegimeLimit limit = make_regime_limit(3, p2);
    const double horizon = 1e4 * p2.time_scale();
    double worst = 0.0;
    for (double lambda : lambdas) {
      worst = std::max(worst, finite_laplace(horizon, lambda, limit, p2));
    }
    add(rows, "laplace_case3", horizon, 0.0, worst, 0.0, 0.05);
  }
  for (int case_id : {4, 5}) {
    const RegimeLimit limit = make_regime_limit(case_id, p45);
    const double horizon = 1e4 * p45.time_scale();
    double worst = 0.0;
    for (double lambda : lambdas) {
      worst = std::max(worst, 1.0 - finite_laplace(horizon, lambda, limit, p45));
    }
    add(rows, "laplace_case" + std::to_string(case_id), horizon, 0.0, worst, 0.0, 0.05);
  }
}

void check_negative_binomial(std::vector<OracleReport>& rows) {
  // At beta = gamma = 1 the population pgf is (1 + c (1-s))^(-r), the
  // Negative-Binomial transform with r = theta A, success weight q = c/(1+c).
  const ModelParams p = params_with(1.0, 1.0);  // A = 2
  const double t = 3.0;
  const double c = t / p.time_scale();
  const double r = p.theta * p.time_scale();
  const double q = c / (1.0 + c);
  double coeff = std::pow(1.0 + c, -r);  // repeated differentiation at s = 0
  for (int k = 0; k < 20; ++k) {
    const double nb_pmf = std::exp(std::lgamma(k + r) - std::lgamma(r) -
                                   std::lgamma(k + 1.0) + r * std::log1p(-q) +
                                   k * std::log(q));
    add(rows, "negative_binomial_degeneration", t, k, coeff, nb_pmf, 1e-10);
    coeff *= q * (r + k) / (k + 1.0);
  }
  // Reconstruction: the mass series re-sums to the pgf value.
  double sum = 0.0;
  double term = std::pow(1.0 + c, -r);
  double s_pow = 1.0;
  for (int k = 0; k < 400; ++k) {
    sum += term * s_pow;
    term *= q * (r + k) / (k + 1.0);
    s_pow *= 0.5;
  }
  add(rows, "negative_binomial_degeneration", t, 0.5, pgf_immigration(t, 0.5, p), sum, 1e-12);
}

void check_regime_continuity(std::vector<OracleReport>& rows) {
  // The two-branch formula must join smoothly as gamma -> beta.
  const double t = 2.0;
  const double s = 0.3;
  const ModelParams equal = params_with(0.5, 0.5);
  const double base = pgf_immigration(t, s, equal);
  for (double eps : {1e-3, 1e-5, 1e-7}) {
    for (double sign : {-1.0, 1.0}) {
      const ModelParams p = params_with(0.5, 0.5 + sign * eps);
      add(rows, "regime_continuity", t, s, pgf_immigration(t, s, p), base, 10.0 * eps);
    }
  }
}

void run_monte_carlo(const SuiteConfig& config, std::vector<EstimateReport>& estimates) {
  const EstimatorOptions options{config.workers, true};
  const std::int64_t n = config.replicates;

  SimConfig sim;
  sim.params = params_with(0.5, 0.5);
  sim.seed = config.seed ^ 0x5b01;
  for (auto& report : estimate_pgf_multi(Process::branching, 1.0, {0.0, 0.5}, n, sim, options)) {
    estimates.push_back(report);
  }

  for (double gamma : kGammas) {
    SimConfig ysim;
    ysim.params = params_with(kBetaDefault, gamma);
    ysim.seed = config.seed ^ (0x5b10 + static_cast<std::uint64_t>(gamma * 100));
    for (double t : {1.0, 10.0}) {
      for (auto& report :
           estimate_pgf_multi(Process::immigration, t, {0.0, 0.3, 0.6}, n, ysim, options)) {
        estimates.push_back(report);
      }
    }
  }

  // Laplace checks against the finite transform, at parameter points where
  // replicate cost stays at desk scale (large K shrinks the time scale A).
  const std::vector<double> lambdas{0.5, 1.0, 2.0};
  {
    SimConfig sim1;
    sim1.params = params_with(1.0, 1.0, 100.0, 2.0);
    sim1.seed = config.seed ^ 0x5b20;
    const RegimeLimit limit = make_regime_limit(1, sim1.params);
    const double t = 1e3 * sim1.params.time_scale();
    for (auto& report : estimate_laplace_multi(limit, t, lambdas, n, sim1, options)) {
      estimates.push_back(report);
    }
  }
  {
    SimConfig sim2;
    sim2.params = params_with(1.0, 0.9, 100.0, 0.5);
    sim2.seed = config.seed ^ 0x5b21;
    sim2.event_cap = 1'000'000'000;
    const RegimeLimit limit = make_regime_limit(2, sim2.params);
    const double t = 1e3 * sim2.params.time_scale();
    for (auto& report : estimate_laplace_multi(limit, t, lambdas, n, sim2, options)) {
      estimates.push_back(report);
    }
  }
  for (int case_id : {4, 5}) {
    SimConfig sim45;
    sim45.params = params_with(0.5, 1.0, 100.0, 0.3);
    sim45.seed = config.seed ^ (0x5b30 + static_cast<std::uint64_t>(case_id));
    const RegimeLimit limit = make_regime_limit(case_id, sim45.params);
    const double t = 1e2 * sim45.params.time_scale();
    for (auto& report : estimate_laplace_multi(limit, t, lambdas, n, sim45, options)) {
      estimates.push_back(report);
    }
  }
}

void assert_label_coverage(const SuiteResult& result) {
  static const char* kRequired[] = {
      "pgf_single_ancestor", "b_factor", "pgf_immigration", "pgf_immigration_series",
      "factorial_identity", "extinction_single", "extinction_immigration",
      "reproduction_generator", "immigration_generator", "pde_residual",
      "normalization_scale", "finite_laplace", "limit_laplace", "laplace_case1",
      "laplace_case2", "laplace_case3", "laplace_case4", "laplace_case5"};
  std::set<std::string> seen;
  for (const auto& row : result.oracles) seen.insert(row.formula);
  for (const auto& row : result.estimates) seen.insert(row.quantity);
  for (const char* label : kRequired) {
    bool found = false;
    for (const auto& formula : seen) {
      if (formula.rfind(label, 0) == 0) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw std::logic_error(std::string("verification suite lost coverage of ") + label);
    }
  }
}

}  // namespace

SuiteResult run_verification_suite(const SuiteConfig& config) {
  SuiteResult result;
  check_single_pgf(result.oracles);
  check_b_factor(result.oracles);
  check_immigration_pgf(result.oracles);
  check_series(result.oracles);
  check_factorials(result.oracles);
  check_extinction(result.oracles);
  check_generators(result.oracles);
  check_pde(result.oracles);
  check_normalization(result.oracles);
  check_laplace_analytic(result.oracles);
  check_negative_binomial(result.oracles);
  check_regime_continuity(result.oracles);

  if (config.include_monte_carlo) {
    run_monte_carlo(config, result.estimates);
  }

  assert_label_coverage(result);

  for (const auto& row : result.oracles) result.oracle_failures += row.pass ? 0 : 1;
  for (const auto& row : result.estimates) {
    result.estimate_exceedances += std::fabs(row.z_score) > 4.0 ? 1 : 0;
  }
  result.exceedance_fraction =
      result.estimates.empty()
          ? 0.0
          : static_cast<double>(result.estimate_exceedances) / result.estimates.size();
  result.pass = result.oracle_failures == 0 && result.exceedance_fraction <= 0.02;
  return result;
}

void write_records(std::ostream& out, const SuiteResult& result) {
  for (const auto& r : result.oracles) {
    nlohmann::json row{{"type", "oracle"},       {"formula", r.formula},
                       {"t", r.t},               {"arg", r.arg},
                       {"closed_form", r.closed_form}, {"oracle_value", r.oracle_value},
                       {"abs_diff", r.abs_diff}, {"tolerance", r.tolerance},
                       {"pass", r.pass}};
    out << row.dump() << '\n';
  }
  for (const auto& r : result.estimates) {
    nlohmann::json row{{"type", "estimate"},
                       {"quantity", r.quantity},
                       {"t", r.t},
                       {"arg", r.arg},
                       {"mc_estimate", r.mc_estimate},
                       {"std_error", r.std_error},
                       {"analytic_value", r.analytic_value},
                       {"z_score", r.z_score},
                       {"n_replicates", r.n_replicates},
                       {"abort_fraction", r.abort_fraction},
                       {"truncation_bias_bound", r.truncation_bias_bound},
                       {"limit_value", r.limit_value},
                       {"flagged", r.flagged}};
    out << row.dump() << '\n';
  }
  nlohmann::json summary{{"type", "summary"},
                         {"oracle_failures", result.oracle_failures},
                         {"estimate_exceedances", result.estimate_exceedances},
                         {"exceedance_fraction", result.exceedance_fraction},
                         {"pass", result.pass}};
  out << summary.dump() << '\n';
}

}  // namespace stablebranch
