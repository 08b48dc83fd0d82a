#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "idla/aggregate.hpp"
#include "idla/oracle.hpp"

using namespace idla;

TEST_CASE("exit law of a single site is uniform over its neighbours") {
  const std::vector<Site> one{{0, 0}};
  const ExitDistribution d = exact_exit_distribution(one, {0, 0});
  REQUIRE(d.probabilities.size() == 4);
  for (const auto& [site, p] : d.probabilities) CHECK(p == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("exit law of the horizontal domino") {
  const std::vector<Site> domino{{0, 0}, {1, 0}};
  const ExitDistribution d = exact_exit_distribution(domino, {0, 0});
  // Visits: g(0,0) = 16/15, g(1,0) = 4/15.
  for (Site s : {Site{-1, 0}, Site{0, 1}, Site{0, -1}}) {
    CHECK(d.probability(s) == doctest::Approx(4.0 / 15).epsilon(1e-13));
  }
  for (Site s : {Site{2, 0}, Site{1, 1}, Site{1, -1}}) {
    CHECK(d.probability(s) == doctest::Approx(1.0 / 15).epsilon(1e-13));
  }
  CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-14));

  const auto exact = exact_exit_distribution_rational(domino, {0, 0});
  CHECK(exact.at({-1, 0}) == Rational(4, 15));
  CHECK(exact.at({2, 0}) == Rational(1, 15));
}

TEST_CASE("sparse solve matches an iterative reference on irregular sets") {
  std::vector<Site> blob;
  for (std::int64_t x = -4; x <= 4; ++x) {
    for (std::int64_t y = -3; y <= 3; ++y) {
      if ((x * 7 + y * 3) % 5 != 0) blob.push_back({x, y});
    }
  }
  blob.push_back({0, 0});
  std::sort(blob.begin(), blob.end());
  blob.erase(std::unique(blob.begin(), blob.end()), blob.end());
  const ExitDistribution d = exact_exit_distribution(blob, {0, 0});
  std::vector<Site> comp = d.component;
  const auto ref = testing::iterative_exit_law(comp, {0, 0});
  REQUIRE(ref.size() == d.probabilities.size());
  for (const auto& [site, p] : ref) CHECK(d.probability(site) == doctest::Approx(p).epsilon(1e-10));
}

TEST_CASE("rational and floating exit laws agree") {
  const std::vector<Site> ell{{0, 0}, {1, 0}, {1, 1}, {2, 1}, {0, -1}};
  const auto exact = exact_exit_distribution_rational(ell, {0, 0});
  const ExitDistribution d = exact_exit_distribution(ell, {0, 0});
  Rational sum = 0;
  for (const auto& [site, q] : exact) {
    sum += q;
    CHECK(d.probability(site) == doctest::Approx(static_cast<double>(q)).epsilon(1e-13));
  }
  CHECK(sum == 1);
}

TEST_CASE("oracle budgets are enforced") {
  std::vector<Site> big;
  for (std::int64_t x = 0; x < 20; ++x) big.push_back({x, 0});
  CHECK_THROWS_AS(exact_exit_distribution_rational(big, {0, 0}), BudgetError);
  const std::vector<LevelBatch> five{{0, 5}};
  CHECK_THROWS_AS(exact_small_aggregate_distribution(five), BudgetError);
  const std::vector<Site> one{{0, 0}};
  CHECK_THROWS_AS(exact_exit_distribution(one, {3, 3}), ConfigError);
}

TEST_CASE("exact law of two particles from the origin") {
  const std::vector<LevelBatch> two{{0, 2}};
  const AggregateLaw law = exact_small_aggregate_distribution(two);
  REQUIRE(law.size() == 4);
  for (const auto& [set, p] : law) {
    CHECK(set.size() == 2);
    CHECK(p == doctest::Approx(0.25));
  }
}

TEST_CASE("exact laws are symmetric under x -> -x") {
  const std::vector<LevelBatch> batches{{0, 2}, {1, 1}};
  const AggregateLaw law = exact_small_aggregate_distribution(batches);
  double total = 0;
  for (const auto& [set, p] : law) {
    total += p;
    SiteSet mirror;
    for (Site s : set) mirror.push_back({-s.x, s.y});
    std::sort(mirror.begin(), mirror.end());
    REQUIRE(law.contains(mirror));
    CHECK(law.at(mirror) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("exact laws do not depend on the emission order") {
  const std::vector<LevelBatch> a{{0, 1}, {1, 1}, {0, 1}};
  const std::vector<LevelBatch> b{{1, 1}, {0, 2}};
  const std::vector<LevelBatch> c{{0, 2}, {1, 1}};
  const AggregateLaw la = exact_small_aggregate_distribution(a);
  CHECK(total_variation(la, exact_small_aggregate_distribution(b)) <= 1e-12);
  CHECK(total_variation(la, exact_small_aggregate_distribution(c)) <= 1e-12);
}

TEST_CASE("total variation of disjoint laws is one") {
  const AggregateLaw a{{SiteSet{{0, 0}}, 1.0}};
  const AggregateLaw b{{SiteSet{{1, 0}}, 1.0}};
  CHECK(total_variation(a, b) == doctest::Approx(1.0));
  CHECK(total_variation(a, a) == 0.0);
}

TEST_CASE("expected exit count through one target on the right line") {
  const std::vector<Site> tau{{6, 0}};
  const ExitCount c = expected_exit_count(0, 6, tau, 60);
  CHECK(c.value == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(c.expansions >= 1);
}

TEST_CASE("expected exit count with a wider block and three targets") {
  const std::vector<Site> tau{{8, 0}, {8, 1}, {-8, 0}};
  const ExitCount c = expected_exit_count(2, 8, tau, 80);
  CHECK(c.value == doctest::Approx(7.5).epsilon(1e-3));
}

TEST_CASE("exit count arguments are validated") {
  const std::vector<Site> off{{5, 0}};
  CHECK_THROWS_AS(expected_exit_count(0, 6, off, 10), ConfigError);
  const std::vector<Site> tau{{6, 0}};
  CHECK_THROWS_AS(expected_exit_count(7, 6, tau, 10), ConfigError);
  CHECK(expected_exit_count(0, 6, {}, 10).value == 0.0);
}
