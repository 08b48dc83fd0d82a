#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "idla/random.hpp"
#include "idla/site.hpp"

namespace idla {

inline constexpr std::uint64_t kDefaultStepBudget = 1'000'000'000ULL;

/// A single walk ran past its step budget. Walks terminate almost surely, so
/// this points at a pathological configuration.
class StepBudgetExceeded : public std::runtime_error {
 public:
  StepBudgetExceeded(Site start, std::uint64_t budget);
  Site start;
  std::uint64_t budget;
};

/// Identity of a particle: its source level and its 0-based index among the
/// particles of that level. Selects the walk in particle-stream mode.
struct ParticleKey {
  std::int64_t level = 0;
  std::uint64_t index = 0;
};

struct WalkOptions {
  std::span<const Region> monitors{};
  bool record_path = false;
  std::uint64_t step_budget = kDefaultStepBudget;
};

struct WalkOutcome {
  Site settled_site;
  std::optional<Site> penultimate_site;
  std::uint64_t path_length = 0;
  /// visited[r] is true iff some site of the walk, start and settled site
  /// included, lies in monitors[r].
  std::vector<bool> visited;
  /// Every visited site in order, start first; only with record_path.
  std::vector<Site> path;
};

/// Occupied set of a growing aggregate plus the stack consumption counters of
/// the run that owns it.
///
/// Storage is a dense grid over the bounding box, kept at least one cell wider
/// than the occupied set on every side so a walk inside the set never needs a
/// bounds check.
class Cluster {
 public:
  explicit Cluster(StackField field);

  const StackField& field() const { return field_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  const std::vector<Site>& sites() const { return sites_; }

  bool contains(Site s) const { return index_of(s) >= 0; }
  /// Insertion index of `s`, or -1.
  std::int64_t index_of(Site s) const;
  /// Stack entries of `s` consumed so far in this run.
  std::uint64_t consumed(Site s) const;

  /// Adds an unoccupied site; returns its insertion index.
  std::size_t insert(Site s);

  WalkOutcome settle(Site start, ParticleKey particle, const WalkOptions& options = {});

 private:
  struct Cell {
    std::uint64_t bits = 0;
    std::uint32_t used = 0;
    std::int32_t index = -1;
  };

  bool interior(Site s) const {
    return s.x > x0_ && s.x < x0_ + width_ - 1 && s.y > y0_ && s.y < y0_ + height_ - 1;
  }
  std::size_t offset(Site s) const {
    return static_cast<std::size_t>(s.y - y0_) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(s.x - x0_);
  }
  void reserve_around(Site s);

  template <bool kStack, bool kTrack>
  WalkOutcome walk(Site start, ParticleKey particle, const WalkOptions& options);

  StackField field_;
  std::int64_t x0_ = 0;
  std::int64_t y0_ = 0;
  std::int64_t width_ = 0;
  std::int64_t height_ = 0;
  std::vector<Cell> cells_;
  std::vector<Site> sites_;
};

/// Runs one particle from `start` against the current occupied set until it
/// reaches an unoccupied site. Does not insert that site.
inline WalkOutcome settle_particle(Cluster& cluster, Site start, ParticleKey particle,
                                   const WalkOptions& options = {}) {
  return cluster.settle(start, particle, options);
}

}  // namespace idla
