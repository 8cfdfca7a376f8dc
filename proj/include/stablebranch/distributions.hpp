// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <vector>

#include "stablebranch/rng.hpp"

namespace stablebranch {

/// Default cap on a single heavy-tailed draw.  Both laws here have power-law
/// tails (the batch law even has infinite mean), so every sampler truncates
/// at an explicit cap and reports it; callers convert the cap into a bias
/// bound through the survival function.
inline constexpr std::int64_t kDefaultBatchCap = 1'000'000;

struct IntDraw {
  std::int64_t value = 0;
  bool truncated = false;
};

enum class LawKind { sibuya, offspring };

/// Exact probability mass of the Sibuya(gamma) law on {1, 2, ...}:
/// pmf(k) = gamma * prod_{j=1}^{k-1} (j - gamma) / k!, evaluated by the
/// log-space recurrence pmf(k+1) = pmf(k) * (k - gamma) / (k + 1).
/// gamma = 1 is admitted as the degenerate point mass at 1.
double sibuya_pmf(std::int64_t k, double gamma);

/// Tail P(I > k) = prod_{j=1}^{k} (1 - gamma / j); equals 1 at k = 0.
double sibuya_survival(std::int64_t k, double gamma);

/// Offspring law with p0 = 1/(1+beta), p1 = 0 and
/// pmf(k) = beta * prod_{j=1}^{k-2} (j - beta) / k! for k >= 2.
/// Mean is exactly 1 (critical); the second factorial moment diverges for
/// beta < 1.  beta = 1 degenerates to the linear birth-death law {1/2, 0, 1/2}.
double offspring_pmf(std::int64_t k, double beta);

/// Tail P(xi > k) = beta * prod_{j=1}^{k-1} (j - beta) / ((1 + beta) * k!).
double offspring_survival(std::int64_t k, double beta);

/// Truncated first moment sum_{k<=n} k * pmf(k) = 1 - G(n - beta) / (G(1 - beta) G(n)),
/// with G the gamma function; increases to 1 as n grows.
double offspring_truncated_mean(std::int64_t n, double beta);

/// Lazily extended log-pmf / cumulative table for one (law, parameter) pair.
///
/// Thread model: build-once-then-immutable per entry.  Storage is reserved up
/// front so published entries are never relocated; readers check the atomic
/// ready count and touch only published slots, writers extend under a mutex.
/// Entry values depend only on (kind, parameter, index), so tables shared
/// between workers stay deterministic regardless of extension order.
class PmfTable {
 public:
  PmfTable(LawKind kind, double parameter, std::int64_t max_value);

  LawKind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  /// Smallest supported value (1 for sibuya, 0 for offspring).
  std::int64_t min_value() const { return kind_ == LawKind::sibuya ? 1 : 0; }
  std::int64_t max_value() const { return max_value_; }
  std::int64_t ready_count() const { return ready_.load(std::memory_order_acquire); }

  /// Extends the table so that at least `count` entries are published.
  void ensure(std::int64_t count);

  double log_pmf(std::int64_t index) const { return log_pmf_[index]; }
  double cumulative(std::int64_t index) const { return cumulative_[index]; }

  /// Inverse-cdf draw: smallest value v with P(X <= v) > u, truncated at
  /// `cap` (a value, not an index) when u falls beyond the table.
  IntDraw sample(RngStream& rng, std::int64_t cap);

  /// Audit dump, one `k,pmf,cumulative` line per published entry.
  void write_csv(std::ostream& out) const;

 private:
  void extend_locked(std::int64_t target);

  LawKind kind_;
  double parameter_;
  std::int64_t max_value_;
  std::int64_t capacity_;
  std::vector<double> log_pmf_;
  std::vector<double> cumulative_;
  std::atomic<std::int64_t> ready_{0};
  std::mutex grow_mutex_;
};

/// Sibuya(gamma) batch-size law with a shared sampling table.
class SibuyaLaw {
 public:
  explicit SibuyaLaw(double gamma, std::int64_t max_value = kDefaultBatchCap);

  double gamma() const { return gamma_; }
  double pmf(std::int64_t k) const;
  double survival(std::int64_t k) const;
  IntDraw sample(RngStream& rng, std::int64_t cap) const;
  const PmfTable& table() const { return *table_; }
  PmfTable& table() { return *table_; }

 private:
  double gamma_;
  std::shared_ptr<PmfTable> table_;
};

/// Critical offspring law with a shared sampling table.
class OffspringLaw {
 public:
  explicit OffspringLaw(double beta, std::int64_t max_value = kDefaultBatchCap);

  double beta() const { return beta_; }
  double pmf(std::int64_t k) const;
  double survival(std::int64_t k) const;
  double truncated_mean(std::int64_t n) const { return offspring_truncated_mean(n, beta_); }
  IntDraw sample(RngStream& rng, std::int64_t cap) const;
  const PmfTable& table() const { return *table_; }
  PmfTable& table() { return *table_; }

 private:
  double beta_;
  std::shared_ptr<PmfTable> table_;
};

struct IncrementDraw {
  std::int64_t value = 0;
  std::int64_t truncated_batches = 0;
};

/// One increment of the compound Poisson immigration flow over `dt`:
/// N ~ Poisson(theta * dt) batches, each an independent Sibuya(gamma) draw.
/// Individual batches are truncated at `batch_cap` and the running sum is
/// clamped at `total_cap`.
IncrementDraw sample_discrete_stable_increment(RngStream& rng, const SibuyaLaw& law,
                                               double theta, double dt,
                                               std::int64_t batch_cap,
                                               std::int64_t total_cap = kDefaultBatchCap *
                                                                        std::int64_t{1000});

}  // namespace stablebranch
