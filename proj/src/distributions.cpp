// SPDX-License-Identifier: Apache-2.0
#include "stablebranch/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace stablebranch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_sibuya_param(double gamma) {
  if (!(gamma > 0.0) || gamma > 1.0) {
    throw std::domain_error("sibuya: gamma must lie in (0, 1]");
  }
}

void check_offspring_param(double beta) {
  if (!(beta > 0.0) || beta > 1.0) {
    throw std::domain_error("offspring: beta must lie in (0, 1]");
  }
}

// log pmf of the next value given the current one; both recurrences share the
// shape log p(k+1) = log p(k) + log(k - shift) - log(k + 1).
double next_log_pmf(LawKind kind, double parameter, std::int64_t k, double log_pk) {
  const double shift = kind == LawKind::sibuya ? parameter : 1.0 + parameter;
  const double numer = static_cast<double>(k) - shift;
  if (numer <= 0.0) return kNegInf;  // boundary parameter: mass ends here
  return log_pk + std::log(numer) - std::log(static_cast<double>(k) + 1.0);
}

double first_log_pmf(LawKind kind, double parameter) {
  return kind == LawKind::sibuya ? std::log(parameter)
                                 : -std::log1p(parameter);  // p0 = 1/(1+beta)
}

}  // namespace

double sibuya_pmf(std::int64_t k, double gamma) {
  check_sibuya_param(gamma);
  if (k < 1) throw std::domain_error("sibuya_pmf: k must be >= 1");
  double log_p = std::log(gamma);
  for (std::int64_t j = 1; j < k; ++j) {
    log_p = next_log_pmf(LawKind::sibuya, gamma, j, log_p);
  }
  return std::exp(log_p);
}

double sibuya_survival(std::int64_t k, double gamma) {
  check_sibuya_param(gamma);
  if (k < 0) throw std::domain_error("sibuya_survival: k must be >= 0");
  double log_s = 0.0;
  for (std::int64_t j = 1; j <= k; ++j) {
    log_s += std::log1p(-gamma / static_cast<double>(j));
  }
  return std::exp(log_s);
}

double offspring_pmf(std::int64_t k, double beta) {
  check_offspring_param(beta);
  if (k < 0) throw std::domain_error("offspring_pmf: k must be >= 0");
  if (k == 0) return 1.0 / (1.0 + beta);
  if (k == 1) return 0.0;
  // p2 = beta / 2, then the recurrence.
  double log_p = std::log(beta / 2.0);
  for (std::int64_t j = 2; j < k; ++j) {
    log_p = next_log_pmf(LawKind::offspring, beta, j, log_p);
  }
  return std::exp(log_p);
}

double offspring_survival(std::int64_t k, double beta) {
  check_offspring_param(beta);
  if (k < 0) throw std::domain_error("offspring_survival: k must be >= 0");
  if (k == 0) return beta / (1.0 + beta);
  // Q(k) = beta * prod_{j=1}^{k-1}(j - beta) / ((1 + beta) k!)
  double log_q = std::log(beta) - std::log1p(beta);
  for (std::int64_t j = 1; j < k; ++j) {
    log_q += std::log(static_cast<double>(j) - beta);
  }
  log_q -= std::lgamma(static_cast<double>(k) + 1.0);
  return std::exp(log_q);
}

double offspring_truncated_mean(std::int64_t n, double beta) {
  check_offspring_param(beta);
  if (n < 0) throw std::domain_error("offspring_truncated_mean: n must be >= 0");
  if (n < 2) return 0.0;  // p1 = 0
  if (beta == 1.0) return 1.0;
  const double x = static_cast<double>(n);
  const double log_tail = std::lgamma(x - beta) - std::lgamma(1.0 - beta) - std::lgamma(x);
  return 1.0 - std::exp(log_tail);
}

PmfTable::PmfTable(LawKind kind, double parameter, std::int64_t max_value)
    : kind_(kind), parameter_(parameter), max_value_(max_value) {
  if (kind == LawKind::sibuya) {
    check_sibuya_param(parameter);
  } else {
    check_offspring_param(parameter);
  }
  if (max_value_ < min_value()) {
    throw std::invalid_argument("PmfTable: max_value below the law's support");
  }
  capacity_ = max_value_ - min_value() + 1;
  // Reserved up front: published entries are never relocated, which is what
  // makes lock-free reads sound.
  log_pmf_.reserve(static_cast<std::size_t>(capacity_));
  cumulative_.reserve(static_cast<std::size_t>(capacity_));
  ensure(std::min<std::int64_t>(capacity_, 1024));
}

void PmfTable::ensure(std::int64_t count) {
  count = std::min(count, capacity_);
  if (ready_.load(std::memory_order_acquire) >= count) return;
  std::lock_guard<std::mutex> lock(grow_mutex_);
  extend_locked(count);
}

void PmfTable::extend_locked(std::int64_t target) {
  std::int64_t have = ready_.load(std::memory_order_relaxed);
  if (have >= target) return;
  while (have < target) {
    const std::int64_t value = min_value() + have;
    double lp;
    if (kind_ == LawKind::offspring && value <= 2) {
      // The ratio recurrence only starts at p2; the head is fixed.
      lp = value == 0 ? first_log_pmf(kind_, parameter_)
           : value == 1 ? kNegInf
                        : std::log(parameter_ / 2.0);
    } else if (have == 0) {
      lp = first_log_pmf(kind_, parameter_);
    } else {
      lp = next_log_pmf(kind_, parameter_, value - 1, log_pmf_.back());
    }
    log_pmf_.push_back(lp);
    cumulative_.push_back((have == 0 ? 0.0 : cumulative_.back()) + std::exp(lp));
    ++have;
  }
  ready_.store(have, std::memory_order_release);
}

IntDraw PmfTable::sample(RngStream& rng, std::int64_t cap) {
  if (cap < min_value()) throw std::invalid_argument("PmfTable::sample: cap below support");
  const std::int64_t cap_value = std::min(cap, max_value_);
  const std::int64_t want = cap_value - min_value() + 1;
  const double u = rng.next_double();

  std::int64_t avail = ready_.load(std::memory_order_acquire);
  const double* cum = cumulative_.data();

  // Hot path: nearly all mass sits in the first few entries.
  const std::int64_t quick = std::min({avail, want, std::int64_t{4}});
  for (std::int64_t i = 0; i < quick; ++i) {
    if (u < cum[i]) return {min_value() + i, false};
  }

  if (avail < want && (avail == 0 || u >= cum[avail - 1])) {
    ensure(want);
    avail = ready_.load(std::memory_order_acquire);
    cum = cumulative_.data();
  }
  const std::int64_t search_end = std::min(avail, want);
  if (search_end > 0 && u < cum[search_end - 1]) {
    const double* pos = std::upper_bound(cum, cum + search_end, u);
    return {min_value() + (pos - cum), false};
  }
  return {cap_value, true};
}

void PmfTable::write_csv(std::ostream& out) const {
  const std::int64_t n = ready_count();
  out << "k,pmf,cumulative\n";
  const auto old_precision = out.precision(17);
  for (std::int64_t i = 0; i < n; ++i) {
    out << (min_value() + i) << ',' << std::exp(log_pmf_[i]) << ',' << cumulative_[i] << '\n';
  }
  out.precision(old_precision);
}

SibuyaLaw::SibuyaLaw(double gamma, std::int64_t max_value)
    : gamma_(gamma), table_(std::make_shared<PmfTable>(LawKind::sibuya, gamma, max_value)) {}

double SibuyaLaw::pmf(std::int64_t k) const {
  if (k < 1) throw std::domain_error("SibuyaLaw::pmf: k must be >= 1");
  if (k <= table_->max_value()) {
    table_->ensure(k);
    return std::exp(table_->log_pmf(k - 1));
  }
  // Beyond the table: closed form gamma * G(k - gamma) / (G(1 - gamma) G(k + 1)).
  if (gamma_ == 1.0) return 0.0;
  const double x = static_cast<double>(k);
  return std::exp(std::log(gamma_) + std::lgamma(x - gamma_) - std::lgamma(1.0 - gamma_) -
                  std::lgamma(x + 1.0));
}

double SibuyaLaw::survival(std::int64_t k) const {
  if (k < 0) throw std::domain_error("SibuyaLaw::survival: k must be >= 0");
  if (k == 0) return 1.0;
  if (gamma_ == 1.0) return 0.0;
  // Product form prod (1 - gamma/j) written with lgamma for O(1) evaluation.
  const double x = static_cast<double>(k);
  return std::exp(std::lgamma(x + 1.0 - gamma_) - std::lgamma(1.0 - gamma_) -
                  std::lgamma(x + 1.0));
}

IntDraw SibuyaLaw::sample(RngStream& rng, std::int64_t cap) const {
  return table_->sample(rng, cap);
}

OffspringLaw::OffspringLaw(double beta, std::int64_t max_value)
    : beta_(beta), table_(std::make_shared<PmfTable>(LawKind::offspring, beta, max_value)) {}

double OffspringLaw::pmf(std::int64_t k) const {
  if (k < 0) throw std::domain_error("OffspringLaw::pmf: k must be >= 0");
  if (k <= table_->max_value()) {
    table_->ensure(k + 1);
    return std::exp(table_->log_pmf(k));
  }
  if (beta_ == 1.0) return 0.0;
  const double x = static_cast<double>(k);
  return std::exp(std::log(beta_) + std::lgamma(x - 1.0 - beta_) - std::lgamma(1.0 - beta_) -
                  std::lgamma(x + 1.0));
}

double OffspringLaw::survival(std::int64_t k) const { return offspring_survival(k, beta_); }

IntDraw OffspringLaw::sample(RngStream& rng, std::int64_t cap) const {
  return table_->sample(rng, cap);
}

IncrementDraw sample_discrete_stable_increment(RngStream& rng, const SibuyaLaw& law,
                                               double theta, double dt, std::int64_t batch_cap,
                                               std::int64_t total_cap) {
  if (!(theta > 0.0)) throw std::domain_error("discrete_stable_increment: theta must be > 0");
  if (!(dt >= 0.0)) throw std::domain_error("discrete_stable_increment: dt must be >= 0");
  IncrementDraw out;
  if (dt == 0.0) return out;
  const std::int64_t batches = rng.poisson(theta * dt);
  for (std::int64_t i = 0; i < batches; ++i) {
    const IntDraw draw = law.sample(rng, batch_cap);
    out.truncated_batches += draw.truncated ? 1 : 0;
    out.value += draw.value;
    if (out.value >= total_cap) {
      out.value = total_cap;
      ++out.truncated_batches;
      break;
    }
  }
  return out;
}

}  // namespace stablebranch
