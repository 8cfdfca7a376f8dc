// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "stablebranch/verify.hpp"

using namespace stablebranch;

namespace {

ModelParams make(double beta, double gamma, double k_rate = 1.0, double theta = 1.0) {
  ModelParams p;
  p.beta = beta;
  p.gamma = gamma;
  p.lifetime_rate = k_rate;
  p.theta = theta;
  return p;
}

}  // namespace

TEST_CASE("pgf estimates agree with the closed forms") {
  SimConfig config;
  config.params = make(0.5, 0.5);
  config.seed = 7;
  const EstimatorOptions options{2, true};
  const auto reports =
      estimate_pgf_multi(Process::immigration, 2.0, {0.0, 0.5}, 20'000, config, options);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].quantity == "extinction_immigration");
  CHECK(reports[1].quantity == "pgf_immigration");
  for (const auto& report : reports) {
    CHECK(report.std_error > 0.0);
    CHECK(std::fabs(report.z_score) <= 4.0);
    CHECK(report.abort_fraction == 0.0);
    CHECK(report.n_replicates == 20'000);
    CHECK(report.truncation_bias_bound < 1e-2);
  }
  // The s = 0 report is the extinction frequency against Phi(t, 0).
  CHECK(reports[0].analytic_value ==
        doctest::Approx(extinction_prob_immigration(2.0, config.params)).epsilon(1e-15));
}

TEST_CASE("estimator rejects a degenerate argument") {
  SimConfig config;
  config.params = make(0.5, 0.5);
  CHECK_THROWS_AS(estimate_pgf(Process::immigration, 1.0, 1.0, 100, config),
                  std::domain_error);
  CHECK_THROWS_AS(estimate_pgf(Process::immigration, 1.0, 1.5, 100, config),
                  std::domain_error);
}

TEST_CASE("estimates are reproducible and consistent across seed ranges") {
  SimConfig config;
  config.params = make(0.5, 0.25);
  config.seed = 1001;
  const EstimatorOptions options{2, true};
  const auto a = estimate_pgf(Process::immigration, 1.0, 0.3, 10'000, config, options);
  const auto b = estimate_pgf(Process::immigration, 1.0, 0.3, 10'000, config, options);
  CHECK(a.mc_estimate == b.mc_estimate);
  CHECK(a.std_error == b.std_error);

  SimConfig other = config;
  other.seed = 2002;
  const auto c = estimate_pgf(Process::immigration, 1.0, 0.3, 10'000, other, options);
  CHECK(std::fabs(a.mc_estimate - c.mc_estimate) <=
        4.0 * std::sqrt(a.std_error * a.std_error + c.std_error * c.std_error));
}

TEST_CASE("laplace estimates") {
  SimConfig config;
  config.params = make(1.0, 1.0, 100.0, 2.0);
  config.seed = 17;
  const RegimeLimit limit = make_regime_limit(1, config.params);
  const double t = 1e3 * config.params.time_scale();
  const EstimatorOptions options{2, true};
  const auto reports = estimate_laplace_multi(limit, t, {0.0, 1.0}, 5000, config, options);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].mc_estimate == 1.0);
  CHECK(reports[0].std_error == 0.0);
  CHECK(reports[0].z_score == 0.0);
  CHECK(std::fabs(reports[1].z_score) <= 4.0);
  CHECK(reports[1].limit_value ==
        doctest::Approx(limit_laplace(1.0, limit, config.params)).epsilon(1e-15));
  CHECK_THROWS_AS(estimate_laplace(limit, t, -1.0, 100, config), std::domain_error);
}

TEST_CASE("oracle boundary values") {
  const ModelParams p = make(0.5, 0.5);
  CHECK(ode_oracle_single_pgf(0.0, 0.3, p) == 0.3);
  double prev = 0.2;
  for (double t : {0.5, 2.0, 8.0}) {
    const double value = ode_oracle_single_pgf(t, 0.2, p);
    CHECK(value > prev);
    prev = value;
  }
  CHECK(quadrature_oracle_immigration_pgf(0.0, 0.4, p) == 1.0);
  // Equal tails: the quadrature reproduces B^(-theta A).
  const double direct = std::pow(b_factor(2.0, 0.4, p), -p.theta * p.time_scale());
  CHECK(std::fabs(quadrature_oracle_immigration_pgf(2.0, 0.4, p) - direct) <= 1e-10);
}

TEST_CASE("a deliberately perturbed reference is rejected loudly") {
  // Single-ancestor extinction at t = A: the population transform itself is
  // nearly flat in A (base and exponent shifts cancel to first order), but
  // 1 - (1 + t/A)^(-1/beta) moves by ~2.5e-3 under a 1% scaling of A, and
  // replicates cost ~3 events each, so a large n is cheap.
  SimConfig config;
  config.params = make(0.5, 0.5);
  config.seed = 31;
  const EstimatorOptions options{2, false};
  const double t = config.params.time_scale();
  const auto report =
      estimate_pgf(Process::branching, t, 0.0, 4'000'000, config, options);
  CHECK(std::fabs(report.z_score) <= 4.0);
  // Scaling K by 1/1.01 scales A by 1.01; the estimator must flag the wrong curve.
  ModelParams perturbed = config.params;
  perturbed.lifetime_rate /= 1.01;
  const double wrong_reference = extinction_prob_single(t, perturbed);
  const double z = (report.mc_estimate - wrong_reference) / report.std_error;
  CHECK(std::fabs(z) > 8.0);
}

TEST_CASE("estimates at two batch caps differ by less than the analytic bias bound") {
  SimConfig coarse;
  coarse.params = make(0.5, 0.25);
  coarse.seed = 51;
  coarse.batch_cap = 1000;
  SimConfig fine = coarse;
  fine.batch_cap = 100'000;
  const EstimatorOptions options{2, true};
  const std::int64_t n = 20'000;
  const auto at_coarse = estimate_pgf(Process::immigration, 1.0, 0.5, n, coarse, options);
  const auto at_fine = estimate_pgf(Process::immigration, 1.0, 0.5, n, fine, options);
  const double noise = 4.0 * std::sqrt(at_coarse.std_error * at_coarse.std_error +
                                       at_fine.std_error * at_fine.std_error);
  CHECK(std::fabs(at_coarse.mc_estimate - at_fine.mc_estimate) <=
        at_coarse.truncation_bias_bound + noise);
  CHECK(at_coarse.truncation_bias_bound ==
        doctest::Approx(coarse.params.theta * 1.0 * sibuya_survival(1000, 0.25))
            .epsilon(1e-12));
  CHECK(at_fine.truncation_bias_bound < at_coarse.truncation_bias_bound);
}

TEST_CASE("excessive aborts flag the report") {
  SimConfig config;
  config.params = make(0.5, 0.25);
  config.seed = 61;
  config.population_cap = 20;  // trips constantly under heavy batches
  const auto report = estimate_pgf(Process::immigration, 2.0, 0.5, 2000, config,
                                   EstimatorOptions{2, false});
  CHECK(report.abort_fraction > 0.01);
  CHECK(report.flagged);
}

TEST_CASE("early resolve level") {
  const ModelParams p = make(0.5, 0.5);
  const std::int64_t at_low_s = early_resolve_level(10.0, 0.3, p);
  const std::int64_t at_high_s = early_resolve_level(10.0, 0.6, p);
  CHECK(at_low_s >= 64);
  CHECK(at_high_s >= at_low_s);
  // The level must pin s^Y below the budget: F(t, s)^level <= 1e-18.
  const double log_f = std::log1p(-pgf_single_ancestor_complement(10.0, 0.6, p));
  CHECK(static_cast<double>(at_high_s) * log_f <= std::log(1e-18) + 1e-9);
  CHECK_THROWS_AS(early_resolve_level(10.0, 1.0, p), std::domain_error);
}

TEST_CASE("verification suite without Monte Carlo") {
  SuiteConfig config;
  config.include_monte_carlo = false;
  const SuiteResult result = run_verification_suite(config);
  CHECK(result.oracle_failures == 0);
  CHECK(result.estimates.empty());
  CHECK(result.exceedance_fraction == 0.0);
  CHECK(result.pass);
  CHECK(result.oracles.size() > 100);

  // Byte-identical serialization on rerun.
  const SuiteResult again = run_verification_suite(config);
  std::ostringstream first, second;
  write_records(first, result);
  write_records(second, again);
  CHECK(first.str() == second.str());
  std::ostringstream csv;
  write_oracles_csv(csv, result.oracles);
  CHECK(csv.str().rfind("formula,", 0) == 0);
}

TEST_CASE("verification suite with a small Monte Carlo budget") {
  SuiteConfig config;
  config.replicates = 2000;
  config.workers = 2;
  const SuiteResult result = run_verification_suite(config);
  CHECK(result.oracle_failures == 0);
  CHECK(!result.estimates.empty());
  CHECK(result.exceedance_fraction <= 0.02);
  CHECK(result.pass);
  bool has_case5 = false;
  for (const auto& row : result.estimates) {
    has_case5 = has_case5 || row.quantity == "laplace_case5";
  }
  CHECK(has_case5);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.0, 1.0, 0.1, 2.0 / 3.0, 1e-300, 3.141592653589793, -0.0,
                   123456789.123456789}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}
