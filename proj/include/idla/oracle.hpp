#pragma once

// Exact ground truth at desk scale: harmonic measure of finite sets, exact laws
// of tiny aggregates, and expected exit counts through vertical lines.

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "idla/site.hpp"

namespace idla {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exact computation was refused because it exceeds its size budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rational = boost::multiprecision::cpp_rational;

inline constexpr std::size_t kMaxExitInterior = 10'000;
inline constexpr std::size_t kMaxRationalInterior = 16;

/// Law of the first site outside `interior` hit by a simple random walk from
/// `start`. Only the 4-connected component of `start` matters; the support is
/// its outer boundary.
struct ExitDistribution {
  Site start;
  std::vector<Site> component;                      // sorted
  std::vector<std::pair<Site, double>> probabilities;  // sorted by site

  double probability(Site s) const;
  double total() const;
};

ExitDistribution exact_exit_distribution(std::span<const Site> interior, Site start);

/// Same law in exact arithmetic; the component of `start` may have at most
/// kMaxRationalInterior sites.
std::map<Site, Rational> exact_exit_distribution_rational(std::span<const Site> interior,
                                                          Site start);

using SiteSet = std::vector<Site>;  // sorted
using AggregateLaw = std::map<SiteSet, double>;

struct LevelBatch {
  std::int64_t level = 0;
  std::uint32_t count = 0;
};

inline constexpr std::uint32_t kMaxExactParticles = 4;

/// Exact law of the final site set when the batches are sent in the given
/// order. Throws BudgetError above max_total particles.
AggregateLaw exact_small_aggregate_distribution(std::span<const LevelBatch> emissions,
                                                std::uint32_t max_total = kMaxExactParticles);

double total_variation(const AggregateLaw& a, const AggregateLaw& b);

struct ExitCountOptions {
  double tolerance = 1e-4;
  /// Largest half-height of the computational box before giving up.
  std::int64_t max_half_height = 1 << 15;
};

struct ExitCount {
  double value = 0;
  std::int64_t half_height = 0;  // box used for the reported value
  int expansions = 0;
};

/// Sum over starts z in [-r, r] x [-L, L] of the probability that the walk
/// from z first meets the lines |x| = r_prime at a site of `targets`. The
/// vertical extent is truncated to a box that is doubled until the value
/// moves by less than the tolerance.
ExitCount expected_exit_count(std::uint32_t r, std::uint32_t r_prime, std::span<const Site> targets,
                              std::int64_t L, const ExitCountOptions& options = {});

}  // namespace idla
