// SPDX-License-Identifier: Apache-2.0
#include "stablebranch/simulator.hpp"

#include <atomic>
#include <ostream>
#include <thread>

namespace stablebranch {

namespace {

// Shared post-event bookkeeping; returns false when the trajectory is done.
inline bool note_event(const SimConfig& config, PopulationState& state) {
  if (state.alive > state.peak_alive) state.peak_alive = state.alive;
  if (state.alive > config.population_cap || state.events >= config.event_cap) {
    state.aborted = true;
    return false;
  }
  if (config.early_resolve_threshold > 0 && state.alive >= config.early_resolve_threshold) {
    state.early_resolved = true;
    return false;
  }
  return true;
}

inline void record(Trajectory* trajectory, double clock, std::int64_t alive, char event) {
  if (trajectory) trajectory->points.push_back({clock, alive, event});
}

}  // namespace

PopulationState simulate_branching(const SimConfig& config, const LawSet& laws,
                                   RngStream& rng, Trajectory* trajectory) {
  config.validate();
  const double k_rate = config.params.lifetime_rate;
  PopulationState state;
  state.alive = 1;
  state.peak_alive = 1;
  while (state.alive > 0) {
    const double dt = rng.exponential(static_cast<double>(state.alive) * k_rate);
    if (state.clock + dt >= config.horizon) {
      state.clock = config.horizon;
      break;
    }
    state.clock += dt;
    const IntDraw offspring = laws.offspring().sample(rng, config.batch_cap);
    state.alive += offspring.value - 1;
    state.truncations += offspring.truncated ? 1 : 0;
    ++state.deaths;
    ++state.events;
    record(trajectory, state.clock, state.alive, 'd');
    if (!note_event(config, state)) break;
  }
  if (trajectory) trajectory->terminal = state;
  return state;
}

PopulationState simulate_immigration(const SimConfig& config, const LawSet& laws,
                                     RngStream& rng, Trajectory* trajectory) {
  config.validate();
  const double k_rate = config.params.lifetime_rate;
  const double theta = config.params.theta;
  PopulationState state;
  for (;;) {
    const double rate = static_cast<double>(state.alive) * k_rate + theta;
    const double dt = rng.exponential(rate);
    if (state.clock + dt >= config.horizon) {
      state.clock = config.horizon;
      break;
    }
    state.clock += dt;
    char kind;
    if (rng.next_double() * rate < theta) {
      const IntDraw batch = laws.sibuya().sample(rng, config.batch_cap);
      state.alive += batch.value;
      state.truncations += batch.truncated ? 1 : 0;
      ++state.immigration_events;
      kind = 'i';
    } else {
      const IntDraw offspring = laws.offspring().sample(rng, config.batch_cap);
      state.alive += offspring.value - 1;
      state.truncations += offspring.truncated ? 1 : 0;
      ++state.deaths;
      kind = 'd';
    }
    ++state.events;
    record(trajectory, state.clock, state.alive, kind);
    if (!note_event(config, state)) break;
  }
  if (trajectory) trajectory->terminal = state;
  return state;
}

std::vector<PopulationState> run_replicates(Process process, const SimConfig& config,
                                            std::int64_t n, int workers) {
  config.validate();
  if (n < 0) throw std::invalid_argument("run_replicates: n must be >= 0");
  std::vector<PopulationState> results(static_cast<std::size_t>(n));
  if (n == 0) return results;

  const LawSet laws(config.params, config.batch_cap);
  auto run_one = [&](std::int64_t index) {
    RngStream rng(config.seed, static_cast<std::uint64_t>(index));
    results[static_cast<std::size_t>(index)] =
        process == Process::branching ? simulate_branching(config, laws, rng)
                                      : simulate_immigration(config, laws, rng);
  };

  if (workers <= 1) {
    for (std::int64_t i = 0; i < n; ++i) run_one(i);
    return results;
  }

  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) return;
        run_one(i);
      }
    });
  }
  for (auto& thread : pool) thread.join();
  return results;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "clock,alive,event_type\n";
  const auto old_precision = out.precision(17);
  for (const auto& point : trajectory.points) {
    out << point.clock << ',' << point.alive << ',' << point.event << '\n';
  }
  out.precision(old_precision);
}

}  // namespace stablebranch
