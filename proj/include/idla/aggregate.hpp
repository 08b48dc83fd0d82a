#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "idla/random.hpp"
#include "idla/site.hpp"

namespace idla {

/// Invalid parameters or inputs that do not meet an operation's contract.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Variant {
  deterministic,   // n particles per level, usual order
  poisson_usual,   // Poisson(n) particles per level, usual order
  poisson_clock,   // Poisson clocks on [0, n], global time order
  classical,       // n particles from the origin only
};

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view s);
std::string_view to_string(WalkMode m);
std::optional<WalkMode> parse_walk_mode(std::string_view s);

struct GrowthParams {
  std::uint32_t n = 1;
  std::uint32_t M = 0;
  Variant variant = Variant::deterministic;
  std::uint64_t seed = 0;
  WalkMode walk = WalkMode::site_stack;
};

struct Provenance {
  std::uint64_t birth_index = 0;  // 1-based
  std::int64_t source_level = 0;
  std::uint64_t particle_index = 0;  // 0-based index within its level
  std::optional<double> birth_time;
  /// Last occupied site visited before this one; absent iff the creating
  /// particle settled at its own start.
  std::optional<Site> predecessor;
  std::uint64_t path_length = 0;
};

/// Occupied sites in insertion order with per-site provenance.
class Aggregate {
 public:
  Aggregate() = default;
  explicit Aggregate(GrowthParams params) : params_(params) {}

  const GrowthParams& params() const { return params_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  const std::vector<Site>& sites() const { return sites_; }
  const std::vector<Provenance>& provenance() const { return provenance_; }
  const Provenance& provenance_of(Site s) const;

  bool contains(Site s) const { return index_.contains(s); }
  std::optional<std::size_t> index_of(Site s) const;

  /// Appends a site. Throws std::logic_error on a repeated site.
  void add(Site s, Provenance p);

  /// Number of occupied sites with ordinate `level`.
  std::size_t row_count(std::int64_t level) const;
  /// Sites sorted by (y, x); convenient for set comparisons.
  std::vector<Site> sorted_sites() const;
  /// The aggregate formed by the first `count` insertions.
  Aggregate prefix(std::size_t count) const;

 private:
  GrowthParams params_;
  std::vector<Site> sites_;
  std::vector<Provenance> provenance_;
  std::unordered_map<Site, std::size_t, SiteHash> index_;
};

/// Structural checks on an aggregate; returns human-readable violations.
std::vector<std::string> validate_aggregate(const Aggregate& a);

}  // namespace idla
