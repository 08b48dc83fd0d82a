#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "idla/aggregate.hpp"
#include "idla/walk.hpp"

namespace idla {

/// One particle to launch: its source level, its index among the particles
/// of that level, and its clock time for the clock variant.
struct Emission {
  std::int64_t level = 0;
  std::uint64_t index = 0;
  std::optional<double> time;

  friend bool operator==(const Emission&, const Emission&) = default;
};

using EmissionPlan = std::vector<Emission>;

enum class LevelOrder {
  usual,                 // 0, +1, -1, +2, -2, ...
  clock,                 // increasing clock time
  explicit_permutation,  // GrowthSpec::permutation applied to the variant's default plan
};

struct GrowthSpec {
  std::uint32_t n = 1;
  std::uint32_t M = 0;
  Variant variant = Variant::deterministic;
  std::uint64_t seed = 0;
  WalkMode walk = WalkMode::site_stack;
  std::vector<Region> monitors;
  bool record_paths = false;
  /// Defaults to clock order for the clock variant and usual order otherwise.
  std::optional<LevelOrder> order;
  std::vector<std::size_t> permutation;
  std::uint64_t step_budget = kDefaultStepBudget;
  /// Test hook: overrides the number of particles sent from a level.
  std::map<std::int64_t, std::uint64_t> forced_counts;

  GrowthParams params() const { return {n, M, variant, seed, walk}; }
  StackField field() const { return {seed, walk}; }
};

/// Rejects n = 0 and orders that do not fit the variant.
void validate(const GrowthSpec& spec);

/// Levels 0, +1, -1, ..., +M, -M.
std::vector<std::int64_t> usual_levels(std::uint32_t M);

/// Arrival times in (0, horizon] of the rate-1 Poisson clock of `level`. The
/// clock is a function of (seed, level) only, so clocks are shared between
/// runs with different M or horizon.
std::vector<double> clock_arrivals(std::uint64_t seed, std::int64_t level, double horizon);

/// Particles sent from `level` under `spec` (n, a Poisson count, or forced).
std::uint64_t level_count(const GrowthSpec& spec, std::int64_t level);

struct ClockEvent {
  double time = 0;
  std::int64_t level = 0;
  std::uint64_t index = 0;
};

struct ClockSchedule {
  std::vector<ClockEvent> events;  // sorted by (time, level, index)
  std::map<std::int64_t, std::uint64_t> counts;
};

ClockSchedule draw_clock_schedule(const GrowthSpec& spec);

/// The emission sequence of a spec, in launch order.
EmissionPlan emission_plan(const GrowthSpec& spec);

struct ParticleRecord {
  Emission emission;
  Site settled;
  std::uint64_t path_length = 0;
  std::vector<bool> visited;  // parallel to GrowthSpec::monitors
  std::vector<Site> path;     // only with record_paths
};

struct GrowthRun {
  Aggregate aggregate;
  std::vector<ParticleRecord> particles;
};

/// Single-run growth engine: launches particles one at a time against its own
/// cluster and records provenance.
class GrowthEngine {
 public:
  GrowthEngine(GrowthParams params, WalkOptions options);

  ParticleRecord emit(const Emission& e);
  void emit_all(const EmissionPlan& plan);

  const Aggregate& aggregate() const { return aggregate_; }
  const Cluster& cluster() const { return cluster_; }
  std::vector<ParticleRecord>& records() { return records_; }
  GrowthRun finish() &&;

 private:
  Cluster cluster_;
  Aggregate aggregate_;
  WalkOptions options_;
  std::vector<ParticleRecord> records_;
};

GrowthRun grow(const GrowthSpec& spec, const EmissionPlan& plan);
GrowthRun grow(const GrowthSpec& spec);

Aggregate build_deterministic(const GrowthSpec& spec);
Aggregate build_poisson_usual(const GrowthSpec& spec);
Aggregate build_poisson_clock(const GrowthSpec& spec);
/// Single-source cluster of n particles from the origin.
Aggregate build_classical(std::uint32_t n, std::uint64_t seed,
                          WalkMode walk = WalkMode::site_stack);

/// A site entering or leaving the symmetric difference of a coupled pair.
struct DiscrepancyEvent {
  std::size_t step = 0;  // position in the large run's emission plan
  Emission emission;
  std::optional<Site> gained;
  std::optional<Site> resolved;
};

/// Relay sequence started by one particle that only the larger run sees.
struct ChainOfChanges {
  Emission initiator;
  std::vector<Site> relays;  // z_1, ..., z_l; the last one is the current discrepancy
  bool active = true;
};

struct DiscrepancyLog {
  std::vector<DiscrepancyEvent> events;
  std::vector<ChainOfChanges> chains;
  std::vector<Site> final_difference;  // sorted
};

struct CoupledPair {
  GrowthRun small;
  GrowthRun large;
  DiscrepancyLog log;
};

/// Grows spec at M_small and M_large with shared randomness, interleaved in the
/// large run's launch order, tracking the symmetric difference as it evolves.
CoupledPair grow_coupled_pair(const GrowthSpec& spec, std::uint32_t M_small,
                              std::uint32_t M_large);

enum class UpwardBase { aggregate, empty };

/// Growth from the top: base (A_n[M] or the empty set), then all particles of
/// levels M+1, ..., t_max. A(t) is the prefix of `run.aggregate` of length
/// `size_at(t)`.
struct UpwardTrajectory {
  std::uint32_t M = 0;
  std::int64_t t_max = 0;
  GrowthRun run;
  std::vector<std::size_t> sizes;               // index t - M
  std::vector<std::optional<std::int64_t>> top;  // highest ordinate of A(t)

  std::size_t size_at(std::int64_t t) const { return sizes.at(static_cast<std::size_t>(t - M)); }
  Aggregate at(std::int64_t t) const { return run.aggregate.prefix(size_at(t)); }
  /// Excess height max{y} - t; absent while A(t) is empty.
  std::optional<std::int64_t> height(std::int64_t t) const;
};

/// spec.variant must be deterministic or poisson-usual; requires t_max >= M.
UpwardTrajectory grow_upward(const GrowthSpec& spec, UpwardBase base, std::int64_t t_max);

}  // namespace idla
