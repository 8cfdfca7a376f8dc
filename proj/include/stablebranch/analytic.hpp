// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "stablebranch/params.hpp"

namespace stablebranch {

/// Generating function of the single-ancestor branching process:
/// F(t, s) = 1 - (1-s) * (1 + t (1-s)^beta / A)^(-1/beta).
/// F(0, s) = s, F(t, 1) = 1, nondecreasing in both t and s.
double pgf_single_ancestor(double t, double s, const ModelParams& params);

/// B(t, s) = 1 + t (1-s)^beta / A; equals 1 at t = 0 and at s = 1.
double b_factor(double t, double s, const ModelParams& params);

/// Generating function of the immigration-driven population:
/// beta = gamma (within tolerance): B(t,s)^(-theta A);
/// otherwise exp{-theta A (1-s)^(gamma-beta) (B^(1-delta) - 1) / (1 - delta)}.
/// Phi(0, s) = 1 and Phi(t, 1) = 1 for finite t.
double pgf_immigration(double t, double s, const ModelParams& params);

/// Series form exp{-theta t (1-s)^gamma (1 + sum_{j=2}^{order} x^(j-1)
/// [-delta]_(j-1 falling) / j!)} with x = t (1-s)^beta / A.  Valid only in
/// the convergence region x < 1; violations raise std::domain_error.
/// order = 1 is the pure discrete-stable first approximation.
double pgf_immigration_series(double t, double s, const ModelParams& params, int order);

/// Series summed under the stop rule |term| < 1e-15 |partial sum|, with a
/// hard ceiling of `max_order` terms.
double pgf_immigration_series_auto(double t, double s, const ModelParams& params,
                                   int max_order = 4096);

/// Both sides of the falling/rising factorial identity
/// [1-d]_(j down) = (1-d) [-d]_(j-1 down) = -(d-1) (-1)^(j-1) [d]_(j-1 up),
/// each evaluated by its own direct product.  Self-test of factorial code paths.
struct FactorialIdentity {
  double falling;           // [1-d]_(j down)
  double via_falling_neg;   // (1-d) [-d]_(j-1 down)
  double via_rising;        // -(d-1) (-1)^(j-1) [d]_(j-1 up)
};
FactorialIdentity factorial_identity(double delta, int j);

/// P(single-ancestor population extinct by t) = 1 - (1 + t/A)^(-1/beta).
double extinction_prob_single(double t, const ModelParams& params);

/// P(immigration-driven population empty at t) = Phi(t, 0), by regime.
double extinction_prob_immigration(double t, const ModelParams& params);

/// Reproduction generator f(s) = K (1-s)^(1+beta) / (1+beta).
double reproduction_generator(double s, const ModelParams& params);
/// The same object written as (1-s)^(1+beta) / (A beta); identical by the
/// definition of A.
double reproduction_generator_scaled(double s, const ModelParams& params);
/// Immigration generator phi(s) = theta (1-s)^gamma.
double immigration_generator(double s, const ModelParams& params);

/// Residual of the transport equation Phi'_t + phi(s) Phi - f(s) Phi'_s,
/// with both partials taken as central differences of pgf_immigration at the
/// given step.  O(step^2) for interior points; identically 0 at s = 1.
/// The step must satisfy 0 < step < min(t, 1 - s); curvature-appropriate
/// step size is the caller's concern.
double pde_residual(double t, double s, const ModelParams& params, double step);

/// Normalization z(t) = (A / t)^(1 / exponent); decreasing in t.
double normalization_scale(double t, double exponent, const ModelParams& params);

/// Finite-time Laplace transform of the normalized population,
/// Psi(t, lambda) = Phi(t, e^(-lambda z(t))) with z from the given case.
double finite_laplace(double t, double lambda, const RegimeLimit& limit,
                      const ModelParams& params);

/// Limit transform per case: 1 -> (1 + lambda^beta)^(-theta A),
/// 2 -> exp{-theta A lambda^gamma}, 3 -> 0 (lambda > 0 only), 4/5 -> 1.
double limit_laplace(double lambda, const RegimeLimit& limit, const ModelParams& params);

/// 1 - F(t, s) evaluated without cancellation (the value can sit far below
/// machine epsilon for long horizons); at s = 0 this is the single-ancestor
/// non-extinction probability.
double pgf_single_ancestor_complement(double t, double s, const ModelParams& params);

/// Entry points in w = 1 - s, for callers that know w to full precision
/// (e.g. Laplace arguments where 1 - s underflows near s = 1).
double pgf_single_ancestor_w(double t, double one_minus_s, const ModelParams& params);
double pgf_single_ancestor_complement_w(double t, double one_minus_s,
                                        const ModelParams& params);
double pgf_immigration_w(double t, double one_minus_s, const ModelParams& params);
double b_factor_w(double t, double one_minus_s, const ModelParams& params);

}  // namespace stablebranch
