// SPDX-License-Identifier: Apache-2.0
#include "stablebranch/rng.hpp"

namespace stablebranch {

namespace {

// Sequential search through the cdf; exact and cheap for small means.
std::int64_t poisson_inversion(RngStream& rng, double mean) {
  const double u = rng.next_double();
  double p = std::exp(-mean);
  double cum = p;
  std::int64_t k = 0;
  while (u >= cum) {
    ++k;
    p *= mean / static_cast<double>(k);
    cum += p;
    if (p == 0.0) break;  // u in the far tail beyond double resolution
  }
  return k;
}

// PTRD transformed rejection (Hormann 1993), valid for mean >= 10.
std::int64_t poisson_ptrd(RngStream& rng, double mean) {
  const double smu = std::sqrt(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);

  for (;;) {
    double v = rng.next_double();
    if (v <= 0.86 * v_r) {
      const double u = v / v_r - 0.43;
      return static_cast<std::int64_t>(
          std::floor((2.0 * a / (0.5 - std::fabs(u)) + b) * u + mean + 0.445));
    }

    double u;
    if (v >= v_r) {
      u = rng.next_double() - 0.5;
    } else {
      u = v / v_r - 0.93;
      u = (u < 0.0 ? -0.5 : 0.5) - u;
      v = rng.next_double() * v_r;
    }

    const double us = 0.5 - std::fabs(u);
    if (us < 0.013 && v > us) continue;

    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.445);
    v = v * inv_alpha / (a / (us * us) + b);
    if (k >= 10.0) {
      // Stirling expansion of lgamma(k + 1).
      const double log_fac =
          (k + 0.5) * std::log(k) - k + 0.5 * std::log(2.0 * 3.14159265358979323846) +
          (1.0 / 12.0 - 1.0 / (360.0 * k * k)) / k;
      if (std::log(v) <= k * log_mean - mean - log_fac) {
        return static_cast<std::int64_t>(k);
      }
    } else if (k >= 0.0) {
      if (std::log(v) <= k * log_mean - mean - std::lgamma(k + 1.0)) {
        return static_cast<std::int64_t>(k);
      }
    }
  }
}

}  // namespace

std::int64_t RngStream::poisson(double mean) {
  if (!(mean >= 0.0)) throw std::domain_error("poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean < kPoissonInversionCutoff) return poisson_inversion(*this, mean);
  return poisson_ptrd(*this, mean);
}

}  // namespace stablebranch
