#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "idla/aggregate.hpp"
#include "idla/growth.hpp"

namespace idla {

struct ForestVertex {
  Site site;
  std::optional<Site> parent;  // absent for roots
  std::uint64_t birth_index = 0;
  std::int64_t source_level = 0;
  std::optional<double> birth_time;
};

/// Directed forest over the sites of an aggregate. Each non-root vertex points
/// to the site its creating particle stood on just before settling.
class Forest {
 public:
  Forest() = default;
  explicit Forest(std::vector<ForestVertex> vertices);

  const std::vector<ForestVertex>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  std::size_t edge_count() const;
  std::size_t root_count() const { return size() - edge_count(); }

  bool contains(Site s) const { return index_.contains(s); }
  const ForestVertex* find(Site s) const;
  std::optional<Site> parent(Site s) const;

 private:
  std::vector<ForestVertex> vertices_;
  std::unordered_map<Site, std::size_t, SiteHash> index_;
};

/// Forest of a multi-source run; a vertex is a root iff its particle settled
/// at its own source without moving.
Forest build_forest(const Aggregate& run);
/// Tree of a classical run, rooted at the origin.
Forest build_radial_tree(const Aggregate& run);

/// Violations of the forest invariants (vertex set equals the aggregate when
/// one is given, lattice edges, roots on the axis, acyclic).
std::vector<std::string> validate_forest(const Forest& f, const Aggregate* run = nullptr);

struct Branch {
  std::vector<Site> sites;  // root first, target last
};

struct BranchDeviation {
  Branch branch;
  std::int64_t max_y = 0;
  std::int64_t min_y = 0;
};

/// Root-to-target branch and its extreme ordinates. Throws std::out_of_range
/// when the target is not a vertex.
BranchDeviation branch_deviation(const Forest& f, Site target);

struct ForestDiff {
  std::vector<Site> vertex_discrepancies;  // in exactly one forest
  std::vector<Site> edge_discrepancies;    // in both, with different parents
  std::vector<ChainOfChanges> chains;      // filled from a coupled run's log

  bool empty() const { return vertex_discrepancies.empty() && edge_discrepancies.empty(); }
  std::size_t count() const { return vertex_discrepancies.size() + edge_discrepancies.size(); }
};

ForestDiff diff_forests(const Forest& a, const Forest& b, const Region& region = Region{});

struct StabilizationScan {
  std::vector<std::uint32_t> grid;
  std::vector<std::uint64_t> seeds;
  /// Smallest grid value from which the restricted forest no longer changes.
  std::vector<std::uint32_t> stabilized_at;
  /// False when the scan cannot confirm stability: the grid has one value, or
  /// the restriction still changed at the last step.
  std::vector<bool> conclusive;

  double fraction_stabilized_within(std::uint32_t M_limit) const;
  std::optional<double> median_stabilized_at() const;
};

/// For each seed, grows clock-variant forests on the M grid with shared
/// randomness and locates the M after which the forest restricted to the strip
/// Z_K stops changing.
StabilizationScan stabilization_radius(std::uint32_t n, std::uint32_t K,
                                       const std::vector<std::uint32_t>& M_grid,
                                       const std::vector<std::uint64_t>& seeds,
                                       WalkMode walk = WalkMode::particle_stream);

/// Per-seed stabilization radius; the kernel behind stabilization_radius.
std::pair<std::uint32_t, bool> stabilization_radius_one(std::uint32_t n, std::uint32_t K,
                                                        const std::vector<std::uint32_t>& M_grid,
                                                        std::uint64_t seed, WalkMode walk);

}  // namespace idla
