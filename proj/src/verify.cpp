// SPDX-License-Identifier: Apache-2.0
#include "stablebranch/verify.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace stablebranch {

namespace {

constexpr double kQuietNan = std::numeric_limits<double>::quiet_NaN();

// ln(1e-18): per-replicate error budget of the early-resolve shortcut.
constexpr double kLogResolveBudget = -41.44653167389282;

struct Moments {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t count = 0;
};

// Mean and standard error with long double accumulation.  The estimands are
// [0,1]-bounded, so mu(1-mu)/n bounds the squared standard error under the
// reference value mu; that bound replaces the plug-in estimate when the
// latter degenerates on rare events (e.g. an extinction cell with a handful
// of expected hits).  A wrong closed form still shows up at |z| in the tens.
template <typename Value>
Moments summarize(const std::vector<PopulationState>& states, Value&& value_of,
                  double reference) {
  long double sum = 0.0L;
  long double sum_sq = 0.0L;
  std::int64_t count = 0;
  for (const auto& state : states) {
    if (state.aborted) continue;
    const long double x = value_of(state);
    sum += x;
    sum_sq += x * x;
    ++count;
  }
  Moments out;
  out.count = count;
  if (count == 0) return out;
  out.mean = static_cast<double>(sum / count);
  if (count >= 2) {
    const long double var =
        std::max<long double>(0.0L, (sum_sq - sum * sum / count) / (count - 1));
    const double floor =
        std::max(0.0, reference * (1.0 - reference)) / static_cast<double>(count);
    out.std_error = std::sqrt(std::max(static_cast<double>(var / count), floor));
  }
  return out;
}

double z_score_of(const Moments& m, double analytic) {
  const double diff = m.mean - analytic;
  if (m.std_error > 0.0) return diff / m.std_error;
  return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
}

double abort_fraction_of(const std::vector<PopulationState>& states) {
  if (states.empty()) return 0.0;
  std::int64_t aborted = 0;
  for (const auto& state : states) aborted += state.aborted ? 1 : 0;
  return static_cast<double>(aborted) / static_cast<double>(states.size());
}

// Worst-case perturbation of a bounded estimand from batch truncation:
// one unit per immigration event that overflows the cap.
double truncation_bound(Process process, double t, const SimConfig& config) {
  const ModelParams& p = config.params;
  if (process == Process::immigration) {
    return p.theta * t * sibuya_survival(config.batch_cap, p.gamma);
  }
  return p.lifetime_rate * t * offspring_survival(config.batch_cap, p.beta);
}

}  // namespace

OracleReport make_oracle_report(std::string formula, double t, double arg, double closed_form,
                                double oracle_value, double tolerance) {
  OracleReport report;
  report.formula = std::move(formula);
  report.t = t;
  report.arg = arg;
  report.closed_form = closed_form;
  report.oracle_value = oracle_value;
  report.abs_diff = std::fabs(closed_form - oracle_value);
  report.tolerance = tolerance;
  report.pass = report.abs_diff <= tolerance;
  return report;
}

std::int64_t early_resolve_level(double t, double s_max, const ModelParams& params) {
  if (!(s_max >= 0.0) || s_max >= 1.0) {
    throw std::domain_error("early_resolve_level: s_max must lie in [0, 1)");
  }
  // E[s^Y(t) | m alive now] <= F(t, s_max)^m, so m with F^m <= 1e-18 pins every
  // requested estimand (extinction indicators included via s = 0 <= s_max).
  const double complement = pgf_single_ancestor_complement(t, s_max, params);
  const double log_f = std::log1p(-complement);
  if (!(log_f < 0.0)) return 0;
  const double level = std::ceil(kLogResolveBudget / log_f);
  if (!(level < 9e18)) return 0;
  return std::max<std::int64_t>(64, static_cast<std::int64_t>(level));
}

std::vector<EstimateReport> estimate_pgf_multi(Process process, double t,
                                               const std::vector<double>& s_values,
                                               std::int64_t n, const SimConfig& base,
                                               const EstimatorOptions& options) {
  for (double s : s_values) {
    if (!(s >= 0.0) || s >= 1.0) {
      throw std::domain_error("estimate_pgf: s must lie in [0, 1); the estimator is "
                              "degenerate at s = 1");
    }
  }
  SimConfig config = base;
  config.horizon = t;
  config.early_resolve_threshold = 0;
  if (options.early_resolve && !s_values.empty()) {
    const double s_max = *std::max_element(s_values.begin(), s_values.end());
    config.early_resolve_threshold = early_resolve_level(t, s_max, config.params);
  }

  const auto states = run_replicates(process, config, n, options.workers);
  const double aborts = abort_fraction_of(states);
  const double bias_bound = truncation_bound(process, t, config);

  std::vector<EstimateReport> reports;
  reports.reserve(s_values.size());
  for (double s : s_values) {
    const double analytic = process == Process::immigration
                                ? pgf_immigration(t, s, config.params)
                                : pgf_single_ancestor(t, s, config.params);
    const auto moments = summarize(
        states,
        [s](const PopulationState& state) {
          return std::pow(s, static_cast<double>(state.alive));
        },
        analytic);
    EstimateReport report;
    const char* tag = process == Process::immigration ? "immigration" : "branching";
    report.quantity = (s == 0.0 ? std::string("extinction_") : std::string("pgf_")) + tag;
    report.t = t;
    report.arg = s;
    report.mc_estimate = moments.mean;
    report.std_error = moments.std_error;
    report.analytic_value = analytic;
    report.z_score = z_score_of(moments, report.analytic_value);
    report.n_replicates = n;
    report.abort_fraction = aborts;
    report.truncation_bias_bound = bias_bound;
    report.limit_value = kQuietNan;
    report.flagged = aborts > 0.01;
    reports.push_back(std::move(report));
  }
  return reports;
}

EstimateReport estimate_pgf(Process process, double t, double s, std::int64_t n,
                            const SimConfig& base, const EstimatorOptions& options) {
  return estimate_pgf_multi(process, t, {s}, n, base, options).front();
}

std::vector<EstimateReport> estimate_laplace_multi(const RegimeLimit& limit, double t,
                                                   const std::vector<double>& lambdas,
                                                   std::int64_t n, const SimConfig& base,
                                                   const EstimatorOptions& options) {
  for (double lambda : lambdas) {
    if (!(lambda >= 0.0)) throw std::domain_error("estimate_laplace: lambda must be >= 0");
  }
  const double z = normalization_scale(t, limit.normalization_exponent, base.params);

  SimConfig config = base;
  config.horizon = t;
  config.early_resolve_threshold = 0;
  if (options.early_resolve) {
    double lambda_min = std::numeric_limits<double>::infinity();
    for (double lambda : lambdas) {
      if (lambda > 0.0) lambda_min = std::min(lambda_min, lambda);
    }
    if (std::isfinite(lambda_min)) {
      const double s_max = std::exp(-lambda_min * z);
      if (s_max < 1.0) {
        config.early_resolve_threshold = early_resolve_level(t, s_max, config.params);
      }
    }
  }

  const auto states = run_replicates(Process::immigration, config, n, options.workers);
  const double aborts = abort_fraction_of(states);
  const double bias_bound = truncation_bound(Process::immigration, t, config);

  std::vector<EstimateReport> reports;
  reports.reserve(lambdas.size());
  for (double lambda : lambdas) {
    const double analytic = finite_laplace(t, lambda, limit, config.params);
    const auto moments = summarize(
        states,
        [lambda, z](const PopulationState& state) {
          return std::exp(-lambda * z * static_cast<double>(state.alive));
        },
        analytic);
    EstimateReport report;
    report.quantity = "laplace_case" + std::to_string(limit.case_id);
    report.t = t;
    report.arg = lambda;
    report.mc_estimate = moments.mean;
    report.std_error = moments.std_error;
    report.analytic_value = analytic;
    report.z_score = z_score_of(moments, report.analytic_value);
    report.n_replicates = n;
    report.abort_fraction = aborts;
    report.truncation_bias_bound = bias_bound;
    report.limit_value = (limit.case_id == 3 && lambda == 0.0)
                             ? kQuietNan
                             : limit_laplace(lambda, limit, config.params);
    report.flagged = aborts > 0.01;
    reports.push_back(std::move(report));
  }
  return reports;
}

EstimateReport estimate_laplace(const RegimeLimit& limit, double t, double lambda,
                                std::int64_t n, const SimConfig& base,
                                const EstimatorOptions& options) {
  return estimate_laplace_multi(limit, t, {lambda}, n, base, options).front();
}

double ode_oracle_single_pgf(double t, double s, const ModelParams& params, double tol) {
  params.validate();
  if (!(t >= 0.0)) throw std::domain_error("ode_oracle: t must be >= 0");
  if (!(s >= 0.0) || s > 1.0) throw std::domain_error("ode_oracle: s must lie in [0, 1]");
  if (t == 0.0) return s;
  // Integrated in the complement w = 1 - F: dw/dt = -K w^(1+beta) / (1+beta).
  const double k_rate = params.lifetime_rate;
  const double beta = params.beta;
  double w = 1.0 - s;
  auto rhs = [&](const double& w_now, double& dwdt, double) {
    dwdt = -k_rate * std::pow(w_now, 1.0 + beta) / (1.0 + beta);
  };
  namespace odeint = boost::numeric::odeint;
  using stepper_type = odeint::runge_kutta_fehlberg78<double>;
  odeint::integrate_adaptive(odeint::make_controlled<stepper_type>(tol, tol), rhs, w, 0.0, t,
                             std::min(t, 1e-3));
  return 1.0 - w;
}

double quadrature_oracle_immigration_pgf(double t, double s, const ModelParams& params,
                                         double tol) {
  params.validate();
  if (!(t >= 0.0)) throw std::domain_error("quadrature_oracle: t must be >= 0");
  if (!(s >= 0.0) || s > 1.0) throw std::domain_error("quadrature_oracle: s must lie in [0, 1]");
  if (t == 0.0 || s == 1.0) return 1.0;
  const double w = 1.0 - s;
  const double a = params.time_scale();
  const double beta = params.beta;
  const double delta = params.tail_ratio();
  const double w_gamma = std::pow(w, params.gamma);
  const double w_beta = std::pow(w, beta);
  // (1 - F(u, s))^gamma with the closed-form F.
  auto integrand = [&](double u) { return w_gamma * std::pow(1.0 + u * w_beta / a, -delta); };
  using quad = boost::math::quadrature::gauss_kronrod<double, 15>;
  const double integral = quad::integrate(integrand, 0.0, t, 15, tol);
  return std::exp(-params.theta * integral);
}

std::string format_double(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

void write_oracles_csv(std::ostream& out, const std::vector<OracleReport>& oracles) {
  out << "formula,t,arg,closed_form,oracle_value,abs_diff,tolerance,pass\n";
  for (const auto& r : oracles) {
    out << r.formula << ',' << format_double(r.t) << ',' << format_double(r.arg) << ','
        << format_double(r.closed_form) << ',' << format_double(r.oracle_value) << ','
        << format_double(r.abs_diff) << ',' << format_double(r.tolerance) << ','
        << (r.pass ? "1" : "0") << '\n';
  }
}

void write_estimates_csv(std::ostream& out, const std::vector<EstimateReport>& estimates) {
  out << "quantity,t,arg,mc_estimate,std_error,analytic_value,z_score,n_replicates,"
         "abort_fraction,truncation_bias_bound,limit_value,flagged\n";
  for (const auto& r : estimates) {
    out << r.quantity << ',' << format_double(r.t) << ',' << format_double(r.arg) << ','
        << format_double(r.mc_estimate) << ',' << format_double(r.std_error) << ','
        << format_double(r.analytic_value) << ',' << format_double(r.z_score) << ','
        << r.n_replicates << ',' << format_double(r.abort_fraction) << ','
        << format_double(r.truncation_bias_bound) << ',' << format_double(r.limit_value)
        << ',' << (r.flagged ? "1" : "0") << '\n';
  }
}

}  // namespace stablebranch
