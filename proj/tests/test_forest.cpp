#include <algorithm>

#include "doctest.h"
#include "idla/forest.hpp"

using namespace idla;

namespace {

GrowthSpec clock_spec(std::uint32_t n, std::uint32_t M, std::uint64_t seed) {
  GrowthSpec s;
  s.n = n;
  s.M = M;
  s.variant = Variant::poisson_clock;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("clock forests satisfy the structural invariants") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Aggregate a = grow(clock_spec(3, 15, seed)).aggregate;
    const Forest f = build_forest(a);
    CHECK(validate_forest(f, &a).empty());
    CHECK(f.size() == a.size());
    CHECK(f.edge_count() + f.root_count() == f.size());
    for (const ForestVertex& v : f.vertices()) {
      if (!v.parent) CHECK(v.site.x == 0);
    }
  }
}

TEST_CASE("a single particle forms one root") {
  GrowthSpec s = clock_spec(1, 0, 1);
  s.forced_counts[0] = 1;
  const Forest f = build_forest(grow(s).aggregate);
  REQUIRE(f.size() == 1);
  CHECK_FALSE(f.vertices()[0].parent.has_value());
  CHECK(f.root_count() == 1);
}

TEST_CASE("the radial tree of a classical cluster has the origin as its only root") {
  const Aggregate a = build_classical(300, 4);
  const Forest t = build_radial_tree(a);
  CHECK(t.root_count() == 1);
  CHECK_FALSE(t.parent({0, 0}).has_value());
  CHECK(validate_forest(t, &a).empty());
  CHECK_THROWS_AS(build_radial_tree(grow(clock_spec(1, 2, 1)).aggregate), ConfigError);
}

TEST_CASE("validation catches a broken edge and a cycle") {
  std::vector<ForestVertex> vs{{{0, 0}, std::nullopt, 1, 0, std::nullopt},
                               {{1, 0}, Site{2, 0}, 2, 0, std::nullopt},
                               {{2, 0}, Site{1, 0}, 3, 0, std::nullopt}};
  CHECK_FALSE(validate_forest(Forest(vs)).empty());
  vs[1].parent = Site{5, 5};
  CHECK_FALSE(validate_forest(Forest(vs)).empty());
}

TEST_CASE("branches run from an axis root to the target") {
  const Forest f = build_forest(grow(clock_spec(4, 20, 3)).aggregate);
  for (const ForestVertex& v : f.vertices()) {
    const BranchDeviation b = branch_deviation(f, v.site);
    REQUIRE_FALSE(b.branch.sites.empty());
    CHECK(b.branch.sites.front().x == 0);
    CHECK(b.branch.sites.back() == v.site);
    for (std::size_t i = 1; i < b.branch.sites.size(); ++i) {
      CHECK(adjacent(b.branch.sites[i - 1], b.branch.sites[i]));
    }
    CHECK(b.max_y >= v.site.y);
    CHECK(b.min_y <= v.site.y);
  }
  CHECK_THROWS_AS(branch_deviation(f, {1000, 0}), std::out_of_range);
}

TEST_CASE("a forest has no discrepancies with itself") {
  const Forest f = build_forest(grow(clock_spec(2, 10, 5)).aggregate);
  CHECK(diff_forests(f, f).empty());
}

TEST_CASE("disjoint forests are discrepant at every vertex") {
  const Forest a({{{0, 0}, std::nullopt, 1, 0, std::nullopt}, {{1, 0}, Site{0, 0}, 2, 0, std::nullopt}});
  const Forest b({{{0, 5}, std::nullopt, 1, 5, std::nullopt}});
  const ForestDiff d = diff_forests(a, b);
  CHECK(d.vertex_discrepancies.size() == 3);
  CHECK(d.edge_discrepancies.empty());
}

TEST_CASE("diff restricted to a region ignores the outside") {
  const Forest a({{{0, 0}, std::nullopt, 1, 0, std::nullopt}, {{0, 9}, std::nullopt, 2, 9, std::nullopt}});
  const Forest b({{{0, 0}, std::nullopt, 1, 0, std::nullopt}});
  CHECK(diff_forests(a, b, Region::strip(3)).empty());
  CHECK(diff_forests(a, b).count() == 1);
}

TEST_CASE("a forced far particle entering the strip changes edges there") {
  // A tall column of particles at a far level makes its last walkers travel
  // deep into the strip in the larger run.
  GrowthSpec s = clock_spec(1, 0, 17);
  for (std::int64_t i = -3; i <= 3; ++i) s.forced_counts[i] = 1;
  s.forced_counts[4] = 60;
  s.record_paths = true;
  const CoupledPair pair = grow_coupled_pair(s, 3, 4);
  const Forest small = build_forest(pair.small.aggregate);
  const Forest large = build_forest(pair.large.aggregate);
  const ForestDiff d = diff_forests(small, large, Region::strip(3));
  CHECK_FALSE(d.empty());
  CHECK_FALSE(pair.log.chains.empty());
}

TEST_CASE("stabilization scan reports the last change on the grid") {
  const std::vector<std::uint32_t> grid{0, 1, 2, 4, 8, 16, 32};
  const auto [at, conclusive] = stabilization_radius_one(1, 0, grid, 3, WalkMode::particle_stream);
  CHECK(std::find(grid.begin(), grid.end(), at) != grid.end());
  if (conclusive) CHECK(at < 32);
  const StabilizationScan scan = stabilization_radius(1, 0, grid, {1, 2, 3, 4});
  CHECK(scan.stabilized_at.size() == 4);
  CHECK(scan.fraction_stabilized_within(32) <= 1.0);
  CHECK_THROWS_AS(stabilization_radius(1, 0, {4, 2}, {1}), ConfigError);
  const auto single = stabilization_radius_one(1, 0, {5}, 3, WalkMode::particle_stream);
  CHECK_FALSE(single.second);
}
