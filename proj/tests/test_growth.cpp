#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "idla/growth.hpp"

using namespace idla;

namespace {

GrowthSpec make_spec(Variant v, std::uint32_t n, std::uint32_t M, std::uint64_t seed) {
  GrowthSpec s;
  s.n = n;
  s.M = M;
  s.variant = v;
  s.seed = seed;
  return s;
}

std::vector<std::size_t> random_permutation(std::size_t size, std::uint64_t key) {
  std::vector<std::size_t> p(size);
  std::iota(p.begin(), p.end(), 0);
  KeyedSequence rng(key, Stream::permutation, 1);
  for (std::size_t i = size; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return p;
}

}  // namespace

TEST_CASE("usual order alternates around the origin") {
  CHECK(usual_levels(2) == std::vector<std::int64_t>{0, 1, -1, 2, -2});
  CHECK(usual_levels(0) == std::vector<std::int64_t>{0});
}

TEST_CASE("deterministic aggregates have (2M+1)n sites and contain the source segment") {
  for (std::uint32_t n : {1u, 2u, 5u}) {
    for (std::uint32_t M : {0u, 3u, 9u}) {
      const Aggregate a = build_deterministic(make_spec(Variant::deterministic, n, M, 7 + n + M));
      CHECK(a.size() == (2 * M + 1) * n);
      for (std::int64_t i = -static_cast<std::int64_t>(M); i <= static_cast<std::int64_t>(M); ++i) {
        CHECK(a.contains({0, i}));
      }
      CHECK(validate_aggregate(a).empty());
    }
  }
}

TEST_CASE("single particle with n = 1, M = 0 occupies only the origin") {
  const Aggregate a = build_deterministic(make_spec(Variant::deterministic, 1, 0, 1));
  REQUIRE(a.size() == 1);
  CHECK(a.sites()[0] == Site{0, 0});
  CHECK(a.provenance()[0].birth_index == 1);
}

TEST_CASE("growth is reproducible from the seed") {
  const GrowthSpec s = make_spec(Variant::poisson_clock, 3, 8, 99);
  const GrowthRun a = grow(s);
  const GrowthRun b = grow(s);
  CHECK(a.aggregate.sites() == b.aggregate.sites());
}

TEST_CASE("stack mode makes the final set independent of the emission order") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GrowthSpec s = make_spec(Variant::deterministic, 3, 6, seed);
    const auto reference = grow(s).aggregate.sorted_sites();
    const std::size_t particles = reference.size();
    for (std::uint64_t k = 0; k < 3; ++k) {
      GrowthSpec p = s;
      p.order = LevelOrder::explicit_permutation;
      p.permutation = random_permutation(particles, seed * 31 + k);
      CHECK(grow(p).aggregate.sorted_sites() == reference);
    }
    GrowthSpec clock = make_spec(Variant::poisson_clock, 3, 6, seed);
    for (std::int64_t i = -6; i <= 6; ++i) clock.forced_counts[i] = 3;
    CHECK(grow(clock).aggregate.sorted_sites() == reference);
  }
}

TEST_CASE("clock and Poisson-usual variants coincide pathwise under stacks") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto usual = grow(make_spec(Variant::poisson_usual, 2, 10, seed)).aggregate.sorted_sites();
    const auto clock = grow(make_spec(Variant::poisson_clock, 2, 10, seed)).aggregate.sorted_sites();
    CHECK(usual == clock);
  }
}

TEST_CASE("particle-stream mode still gives the exact cardinality") {
  GrowthSpec s = make_spec(Variant::deterministic, 4, 5, 3);
  s.walk = WalkMode::particle_stream;
  CHECK(grow(s).aggregate.size() == 44);
}

TEST_CASE("clock emissions are in time order with times in (0, n]") {
  const GrowthSpec s = make_spec(Variant::poisson_clock, 2, 5, 4);
  const EmissionPlan plan = emission_plan(s);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    REQUIRE(plan[i].time.has_value());
    CHECK(*plan[i].time > 0.0);
    CHECK(*plan[i].time <= 2.0);
    if (i > 0) CHECK(*plan[i - 1].time <= *plan[i].time);
  }
  const GrowthRun run = grow(s);
  for (const Provenance& p : run.aggregate.provenance()) CHECK(p.birth_time.has_value());
}

TEST_CASE("Poisson counts are nested in n") {
  for (std::int64_t level = -20; level <= 20; ++level) {
    const auto small = level_count(make_spec(Variant::poisson_usual, 2, 20, 8), level);
    const auto large = level_count(make_spec(Variant::poisson_usual, 5, 20, 8), level);
    CHECK(small <= large);
  }
}

TEST_CASE("invalid specifications are rejected") {
  CHECK_THROWS_AS(grow(make_spec(Variant::deterministic, 0, 3, 1)), ConfigError);
  GrowthSpec bad = make_spec(Variant::deterministic, 1, 2, 1);
  bad.order = LevelOrder::explicit_permutation;
  bad.permutation = {0, 0, 1, 2, 3};
  CHECK_THROWS_AS(grow(bad), ConfigError);
  CHECK_THROWS_AS(build_poisson_clock(make_spec(Variant::deterministic, 1, 2, 1)), ConfigError);
}

TEST_CASE("the step budget aborts a growth run") {
  GrowthSpec s = make_spec(Variant::deterministic, 50, 0, 1);
  s.step_budget = 3;
  CHECK_THROWS_AS(grow(s), StepBudgetExceeded);
}

TEST_CASE("provenance predecessors are adjacent and older") {
  const Aggregate a = grow(make_spec(Variant::poisson_clock, 4, 10, 12)).aggregate;
  CHECK(validate_aggregate(a).empty());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Provenance& p = a.provenance()[i];
    CHECK(p.birth_index == i + 1);
    if (p.predecessor) {
      CHECK(adjacent(*p.predecessor, a.sites()[i]));
      CHECK(*a.index_of(*p.predecessor) < i);
    } else {
      CHECK(a.sites()[i] == source(p.source_level));
    }
  }
}

TEST_CASE("classical cluster has n sites around the origin") {
  const Aggregate a = build_classical(200, 5);
  CHECK(a.size() == 200);
  CHECK(a.contains({0, 0}));
  CHECK(validate_aggregate(a).empty());
}

TEST_CASE("coupled pair tracks the symmetric difference") {
  GrowthSpec s = make_spec(Variant::poisson_clock, 2, 0, 21);
  s.record_paths = true;
  const CoupledPair pair = grow_coupled_pair(s, 5, 12);
  const auto small = pair.small.aggregate.sorted_sites();
  const auto large = pair.large.aggregate.sorted_sites();
  std::vector<Site> diff;
  std::set_symmetric_difference(small.begin(), small.end(), large.begin(), large.end(), std::back_inserter(diff));
  std::sort(diff.begin(), diff.end());
  CHECK(pair.log.final_difference == diff);

  GrowthSpec direct_small = s;
  direct_small.M = 5;
  GrowthSpec direct_large = s;
  direct_large.M = 12;
  CHECK(grow(direct_small).aggregate.sorted_sites() == small);
  CHECK(grow(direct_large).aggregate.sorted_sites() == large);
  for (const ChainOfChanges& chain : pair.log.chains) {
    CHECK(std::abs(chain.initiator.level) > 5);
    CHECK_FALSE(chain.relays.empty());
  }
}

TEST_CASE("excess height drops by one per level when no particle is sent") {
  GrowthSpec s = make_spec(Variant::deterministic, 3, 4, 2);
  for (std::int64_t t = 5; t <= 30; ++t) s.forced_counts[t] = 0;
  const UpwardTrajectory traj = grow_upward(s, UpwardBase::aggregate, 30);
  for (std::int64_t t = 4; t < 30; ++t) CHECK(*traj.height(t + 1) - *traj.height(t) == -1);
}

TEST_CASE("excess height never drops by more than one") {
  const UpwardTrajectory traj = grow_upward(make_spec(Variant::poisson_usual, 2, 10, 6), UpwardBase::aggregate, 200);
  for (std::int64_t t = 10; t < 200; ++t) {
    if (traj.height(t) && traj.height(t + 1)) CHECK(*traj.height(t + 1) - *traj.height(t) >= -1);
  }
  CHECK(traj.at(10).size() == traj.size_at(10));
}

TEST_CASE("upward growth from the empty base starts empty") {
  const UpwardTrajectory traj = grow_upward(make_spec(Variant::deterministic, 2, 3, 6), UpwardBase::empty, 10);
  CHECK_FALSE(traj.height(3).has_value());
  CHECK(traj.size_at(10) == 14);
  CHECK_THROWS_AS(grow_upward(make_spec(Variant::poisson_clock, 2, 3, 6), UpwardBase::empty, 10), ConfigError);
}
