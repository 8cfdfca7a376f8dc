// SPDX-License-Identifier: Apache-2.0
#include "stablebranch/analytic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stablebranch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_time(double t) {
  if (!(t >= 0.0)) throw std::domain_error("time t must be >= 0");
}

double log_one_minus(double s) {
  if (!(s >= 0.0) || s > 1.0) throw std::domain_error("pgf argument s must lie in [0, 1]");
  return std::log1p(-s);  // exact near s = 1; -inf at s = 1
}

double log_w(double w) {
  if (!(w >= 0.0) || w > 1.0) throw std::domain_error("1 - s must lie in [0, 1]");
  return std::log(w);
}

// (B^x - 1) / x evaluated as a function of L = log B.  The closed form has a
// removable singularity at x = 0; for |x L| below the cutoff the Taylor
// expansion L (1 + xL/2 + (xL)^2/6 + (xL)^3/24) carries full precision.
double power_integral(double log_b, double x) {
  const double xl = x * log_b;
  if (std::fabs(xl) < 1e-4) {
    return log_b * (1.0 + xl * (0.5 + xl * (1.0 / 6.0 + xl / 24.0)));
  }
  return std::expm1(xl) / x;
}

// Shared core in lw = log(1 - s); returns 1 - F, which stays exact when the
// complement is far below machine epsilon.
double pgf_single_complement_core(double t, double lw, const ModelParams& p) {
  if (lw == kNegInf) return 0.0;
  const double x = t * std::exp(p.beta * lw) / p.time_scale();
  return std::exp(lw - std::log1p(x) / p.beta);
}

double pgf_single_core(double t, double lw, const ModelParams& p) {
  return 1.0 - pgf_single_complement_core(t, lw, p);
}

double pgf_immigration_core(double t, double lw, const ModelParams& p) {
  if (lw == kNegInf) return 1.0;
  const double a = p.time_scale();
  const double x = t * std::exp(p.beta * lw) / a;
  const double log_b = std::log1p(x);
  if (p.regime() == Regime::equal) {
    return std::exp(-p.theta * a * log_b);
  }
  const double exponent = p.theta * a * std::exp((p.gamma - p.beta) * lw) *
                          power_integral(log_b, 1.0 - p.tail_ratio());
  return std::exp(-exponent);
}

double series_core(double t, double lw, const ModelParams& p, int max_order, bool stop_rule) {
  if (max_order < 1) throw std::invalid_argument("series order must be >= 1");
  if (lw == kNegInf) return 1.0;
  const double a = p.time_scale();
  const double x = t * std::exp(p.beta * lw) / a;
  if (!(x < 1.0)) {
    throw std::domain_error("series expansion outside its convergence region t(1-s)^beta/A < 1");
  }
  const double delta = p.tail_ratio();
  double sum = 1.0;
  double term = x * (-delta) / 2.0;  // j = 2
  for (int j = 2; j <= max_order; ++j) {
    sum += term;
    if (stop_rule && std::fabs(term) < 1e-15 * std::fabs(sum)) break;
    term *= x * (-delta - static_cast<double>(j) + 1.0) / (static_cast<double>(j) + 1.0);
  }
  return std::exp(-p.theta * t * std::exp(p.gamma * lw) * sum);
}

}  // namespace

double pgf_single_ancestor(double t, double s, const ModelParams& params) {
  params.validate();
  check_time(t);
  const double lw = log_one_minus(s);
  if (t == 0.0) return s;
  return pgf_single_core(t, lw, params);
}

double pgf_single_ancestor_w(double t, double one_minus_s, const ModelParams& params) {
  params.validate();
  check_time(t);
  return pgf_single_core(t, log_w(one_minus_s), params);
}

double pgf_single_ancestor_complement(double t, double s, const ModelParams& params) {
  params.validate();
  check_time(t);
  return pgf_single_complement_core(t, log_one_minus(s), params);
}

double pgf_single_ancestor_complement_w(double t, double one_minus_s,
                                        const ModelParams& params) {
  params.validate();
  check_time(t);
  return pgf_single_complement_core(t, log_w(one_minus_s), params);
}

double b_factor(double t, double s, const ModelParams& params) {
  params.validate();
  check_time(t);
  const double lw = log_one_minus(s);
  return 1.0 + t * std::exp(params.beta * lw) / params.time_scale();
}

double b_factor_w(double t, double one_minus_s, const ModelParams& params) {
  params.validate();
  check_time(t);
  return 1.0 + t * std::exp(params.beta * log_w(one_minus_s)) / params.time_scale();
}

double pgf_immigration(double t, double s, const ModelParams& params) {
  params.validate();
  check_time(t);
  return pgf_immigration_core(t, log_one_minus(s), params);
}

double pgf_immigration_w(double t, double one_minus_s, const ModelParams& params) {
  params.validate();
  check_time(t);
  return pgf_immigration_core(t, log_w(one_minus_s), params);
}

double pgf_immigration_series(double t, double s, const ModelParams& params, int order) {
  params.validate();
  check_time(t);
  return series_core(t, log_one_minus(s), params, order, /*stop_rule=*/false);
}

double pgf_immigration_series_auto(double t, double s, const ModelParams& params,
                                   int max_order) {
  params.validate();
  check_time(t);
  return series_core(t, log_one_minus(s), params, max_order, /*stop_rule=*/true);
}

FactorialIdentity factorial_identity(double delta, int j) {
  if (j < 1) throw std::invalid_argument("factorial_identity: j must be >= 1");
  FactorialIdentity out{1.0, 1.0 - delta, -(delta - 1.0)};
  for (int i = 0; i < j; ++i) {
    out.falling *= 1.0 - delta - static_cast<double>(i);
  }
  for (int i = 0; i + 1 < j; ++i) {
    out.via_falling_neg *= -delta - static_cast<double>(i);
    out.via_rising *= delta + static_cast<double>(i);
  }
  if ((j - 1) % 2 == 1) out.via_rising = -out.via_rising;
  return out;
}

double extinction_prob_single(double t, const ModelParams& params) {
  params.validate();
  check_time(t);
  const double a = params.time_scale();
  return -std::expm1(-std::log1p(t / a) / params.beta);
}

double extinction_prob_immigration(double t, const ModelParams& params) {
  params.validate();
  check_time(t);
  // Same code path as pgf_immigration at s = 0 (lw = 0), so the two agree to
  // machine precision by construction.
  return pgf_immigration_core(t, 0.0, params);
}

double reproduction_generator(double s, const ModelParams& params) {
  params.validate();
  const double lw = log_one_minus(s);
  return params.lifetime_rate * std::exp((1.0 + params.beta) * lw) / (1.0 + params.beta);
}

double reproduction_generator_scaled(double s, const ModelParams& params) {
  params.validate();
  const double lw = log_one_minus(s);
  return std::exp((1.0 + params.beta) * lw) / (params.time_scale() * params.beta);
}

double immigration_generator(double s, const ModelParams& params) {
  params.validate();
  return params.theta * std::exp(params.gamma * log_one_minus(s));
}

double pde_residual(double t, double s, const ModelParams& params, double step) {
  params.validate();
  if (s == 1.0) return 0.0;  // every term vanishes
  if (!(step > 0.0)) throw std::invalid_argument("pde_residual: step must be > 0");
  if (!(t - step > 0.0) || !(s - step > 0.0) || !(s + step < 1.0)) {
    throw std::invalid_argument("pde_residual: (t, s) must be interior at the given step");
  }
  const double d_t = (pgf_immigration(t + step, s, params) -
                      pgf_immigration(t - step, s, params)) /
                     (2.0 * step);
  const double d_s = (pgf_immigration(t, s + step, params) -
                      pgf_immigration(t, s - step, params)) /
                     (2.0 * step);
  return d_t + immigration_generator(s, params) * pgf_immigration(t, s, params) -
         reproduction_generator(s, params) * d_s;
}

double normalization_scale(double t, double exponent, const ModelParams& params) {
  params.validate();
  if (!(t > 0.0)) throw std::domain_error("normalization_scale: t must be > 0");
  if (!(exponent > 0.0)) throw std::domain_error("normalization_scale: exponent must be > 0");
  return std::exp(std::log(params.time_scale() / t) / exponent);
}

double finite_laplace(double t, double lambda, const RegimeLimit& limit,
                      const ModelParams& params) {
  params.validate();
  if (!(lambda >= 0.0)) throw std::domain_error("finite_laplace: lambda must be >= 0");
  if (lambda == 0.0) return 1.0;
  const double z = normalization_scale(t, limit.normalization_exponent, params);
  // 1 - e^(-lambda z) computed directly; going through s would round to 1 - 1
  // once lambda z drops below machine epsilon.
  const double w = -std::expm1(-lambda * z);
  return pgf_immigration_w(t, w, params);
}

double limit_laplace(double lambda, const RegimeLimit& limit, const ModelParams& params) {
  // Re-derive the case to reject case/parameter mismatches.
  const RegimeLimit checked = make_regime_limit(limit.case_id, params);
  if (!(lambda >= 0.0)) throw std::domain_error("limit_laplace: lambda must be >= 0");
  const double a = params.time_scale();
  switch (checked.case_id) {
    case 1:
      return std::exp(-params.theta * a * std::log1p(std::pow(lambda, params.beta)));
    case 2:
      return std::exp(-params.theta * a * std::pow(lambda, params.gamma));
    case 3:
      if (lambda == 0.0) {
        throw std::domain_error("limit_laplace: case 3 is defined for lambda > 0 only");
      }
      return 0.0;
    default:
      return 1.0;  // cases 4 and 5
  }
}

}  // namespace stablebranch
