// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "stablebranch/distributions.hpp"
#include "stablebranch/params.hpp"
#include "stablebranch/rng.hpp"

namespace stablebranch {

enum class Process { branching, immigration };

struct SimConfig {
  ModelParams params;
  double horizon = 1.0;
  std::int64_t batch_cap = kDefaultBatchCap;
  std::int64_t population_cap = 10'000'000;
  std::int64_t event_cap = 100'000'000;
  std::uint64_t seed = 0;
  /// When > 0, a trajectory stops as soon as the population reaches this
  /// level and is marked early_resolved.  Estimators that only read bounded
  /// functionals of the terminal count (s^Y with s < 1, extinction
  /// indicators, e^(-lambda z Y)) enable this with a threshold chosen so the
  /// induced error is below 1e-18 per replicate; paths themselves are exact
  /// up to the stopping moment.  0 disables the shortcut.
  std::int64_t early_resolve_threshold = 0;

  void validate() const {
    params.validate();
    if (!(horizon >= 0.0)) throw std::invalid_argument("SimConfig: horizon must be >= 0");
    if (batch_cap < 1 || population_cap < 1 || event_cap < 1) {
      throw std::invalid_argument("SimConfig: caps must be >= 1");
    }
  }
};

struct PopulationState {
  std::int64_t alive = 0;
  double clock = 0.0;
  std::int64_t events = 0;  // deaths + immigration arrivals
  std::int64_t deaths = 0;
  std::int64_t immigration_events = 0;
  std::int64_t truncations = 0;  // sampler cap hits
  std::int64_t peak_alive = 0;
  bool aborted = false;
  bool early_resolved = false;
};

struct TrajectoryPoint {
  double clock;
  std::int64_t alive;
  char event;  // 'i' immigration, 'd' death
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  PopulationState terminal;
};

/// Immutable sampler bundle for one parameter set; shared across workers.
class LawSet {
 public:
  LawSet(const ModelParams& params, std::int64_t batch_cap)
      : offspring_(params.beta, batch_cap), sibuya_(params.gamma, batch_cap) {}

  const OffspringLaw& offspring() const { return offspring_; }
  const SibuyaLaw& sibuya() const { return sibuya_; }

 private:
  OffspringLaw offspring_;
  SibuyaLaw sibuya_;
};

/// Single-ancestor process: one initial particle, exponential(alive * K)
/// waiting times, each death replaced by an offspring draw.  Stops at the
/// horizon, at extinction, or when a cap trips (abort, never a crash).
PopulationState simulate_branching(const SimConfig& config, const LawSet& laws,
                                   RngStream& rng, Trajectory* trajectory = nullptr);

/// Immigration-driven process: starts empty; death at total rate alive * K
/// competes with immigration at rate theta, immigration adds a Sibuya batch.
PopulationState simulate_immigration(const SimConfig& config, const LawSet& laws,
                                     RngStream& rng, Trajectory* trajectory = nullptr);

/// n independent replicates on stream ids 0..n-1.  The result is identical
/// for every worker count: replicate i always uses RngStream(seed, i) and
/// lands at index i.
std::vector<PopulationState> run_replicates(Process process, const SimConfig& config,
                                            std::int64_t n, int workers);

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace stablebranch
