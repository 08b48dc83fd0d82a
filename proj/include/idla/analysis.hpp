#pragma once

// Replica experiments. Every estimator here is a deterministic function of its
// parameters and seed list; replicas fan out through run_replicas and are
// merged in seed order.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "idla/aggregate.hpp"
#include "idla/growth.hpp"
#include "idla/parallel.hpp"

namespace idla {

struct Estimate {
  std::string name;
  double value = 0;
  double std_error = 0;
  std::size_t samples = 0;
};

struct Verdict {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentReport {
  std::string id;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> records;  // one row per seed (and sub-case)
  std::vector<Estimate> estimates;
  std::vector<Verdict> verdicts;
  double wall_seconds = 0;

  bool passed() const;
  const Estimate& estimate(const std::string& name) const;
  const Verdict& verdict(const std::string& name) const;
};

struct AnalysisOptions {
  Execution exec;
  WalkMode walk = WalkMode::site_stack;
};

/// Grows one replica of `variant` (classical ignores M).
Aggregate grow_replica(Variant variant, std::uint32_t n, std::uint32_t M, std::uint64_t seed,
                       WalkMode walk = WalkMode::site_stack);

// --- widths ---------------------------------------------------------------

ExperimentReport width_per_level(Variant variant, std::uint32_t n, std::uint32_t M,
                                 const std::vector<std::int64_t>& rows,
                                 const std::vector<std::uint64_t>& seeds,
                                 const AnalysisOptions& options = {});

// --- shape ----------------------------------------------------------------

struct ShapeDeviation {
  std::uint32_t n = 0;
  std::uint32_t K = 0;
  /// Largest n/2 - |x| over unoccupied sites of [-n/2, n/2] x [-K, K]; 0 if none.
  double inner = 0;
  /// Largest |x| - n/2 over occupied sites of the strip; 0 if none.
  double outer = 0;

  double worst() const { return inner > outer ? inner : outer; }
};

ShapeDeviation shape_deviation(const Aggregate& a, std::uint32_t n, std::uint32_t K);

/// M used for a given n; the default is K^2.
using MRule = std::function<std::uint32_t(std::uint32_t n)>;

ExperimentReport shape_deviation_scan(Variant variant, const std::vector<std::uint32_t>& n_list,
                                      std::uint32_t K, const MRule& M_rule,
                                      const std::vector<std::uint64_t>& seeds,
                                      const AnalysisOptions& options = {});

// --- far particles --------------------------------------------------------

/// Levels beyond this threshold count as far for strip half-height M.
std::int64_t far_threshold(std::uint32_t M, double alpha);

/// For each M in the grid, grows the aggregate up to level
/// far_threshold(M) + far_levels(M) and records, per seed, whether any
/// particle from a far level visited the strip Z_M before settling.
ExperimentReport far_particle_monitor(Variant variant, std::uint32_t n,
                                      const std::vector<std::uint32_t>& M_grid, double alpha,
                                      const std::function<std::uint32_t(std::uint32_t)>& far_levels,
                                      const std::vector<std::uint64_t>& seeds,
                                      const AnalysisOptions& options = {});

// --- height process -------------------------------------------------------

struct HeightTrace {
  std::uint32_t M = 0;
  /// h_t for t = M..t_max; absent while the aggregate is empty.
  std::vector<std::optional<std::int64_t>> heights;

  std::optional<std::int64_t> at(std::int64_t t) const {
    return heights.at(static_cast<std::size_t>(t - M));
  }
  /// Hitting times tau_1(zeta), tau_2(zeta), ... of {h_t <= zeta} after M.
  std::vector<std::int64_t> hitting_times(double zeta, std::size_t how_many = 2) const;
};

HeightTrace height_trace(const UpwardTrajectory& traj);

ExperimentReport height_drift(Variant variant, std::uint32_t n, std::uint32_t M,
                              const std::vector<double>& zeta_grid, std::int64_t t_max,
                              const std::vector<std::uint64_t>& seeds,
                              const AnalysisOptions& options = {});

// --- empty lines and components -------------------------------------------

struct LineStatistics {
  std::vector<std::int64_t> empty_levels;
  bool axis_empty = false;
  std::size_t components = 0;
};

/// Empty levels in [lo, hi] and 4-connected components of the aggregate
/// restricted to the rows [lo, hi].
LineStatistics line_statistics(const Aggregate& a, std::int64_t lo, std::int64_t hi);

ExperimentReport empty_lines(Variant variant, std::uint32_t n, std::uint32_t M,
                             std::pair<std::int64_t, std::int64_t> window,
                             const std::vector<std::uint64_t>& seeds,
                             const AnalysisOptions& options = {});

// --- mixing ---------------------------------------------------------------

ExperimentReport mixing_correlation(Variant variant, std::uint32_t n, std::uint32_t M,
                                    const std::vector<Site>& C1, const std::vector<Site>& C2,
                                    const std::vector<std::int64_t>& k_grid,
                                    const std::vector<std::uint64_t>& seeds,
                                    const AnalysisOptions& options = {},
                                    std::size_t bootstrap_resamples = 200);

// --- symmetries -----------------------------------------------------------

std::vector<Site> translate(const std::vector<Site>& pattern, std::int64_t k);
/// Reflection through the horizontal line y = k/2.
std::vector<Site> reflect_horizontal(const std::vector<Site>& pattern, std::int64_t k);
/// Reflection through the vertical axis.
std::vector<Site> reflect_vertical(const std::vector<Site>& pattern);

ExperimentReport symmetry_checks(Variant variant, std::uint32_t n, std::uint32_t M,
                                 const std::vector<Site>& pattern, std::int64_t k,
                                 const std::vector<std::uint64_t>& seeds,
                                 const AnalysisOptions& options = {});

// --- forest statistics ----------------------------------------------------

/// Delta = max ordinate along the branch from the root to (d, 0), for
/// clock-variant forests with particles_for(d) particles per unit time and
/// levels up to M_for(d). Seeds where (d, 0) is not occupied are counted.
ExperimentReport branch_deviation_scan(const std::vector<std::uint32_t>& distances,
                                       const std::function<std::uint32_t(std::uint32_t)>& particles_for,
                                       const std::function<std::uint32_t(std::uint32_t)>& M_for,
                                       const std::vector<std::uint64_t>& seeds,
                                       const AnalysisOptions& options = {});

/// Probability that every site of `pattern` is a vertex of the clock forest,
/// for each n in n_list.
ExperimentReport spanning_probability(const std::vector<std::uint32_t>& n_list, std::uint32_t M,
                                      const std::vector<Site>& pattern,
                                      const std::vector<std::uint64_t>& seeds,
                                      const AnalysisOptions& options = {});

/// Directed edge (from parent to child).
struct DirectedEdge {
  Site from;
  Site to;
};

/// Frequency of a directed edge pattern in the clock forest, at its given
/// position and translated by (0, k).
ExperimentReport forest_pattern_translation(std::uint32_t n, std::uint32_t M,
                                            const std::vector<DirectedEdge>& pattern,
                                            std::int64_t k,
                                            const std::vector<std::uint64_t>& seeds,
                                            const AnalysisOptions& options = {});

// --- oracle and forest-scan reports ---------------------------------------

/// For every multiset of at most `max_particles` emissions over `levels`, the
/// exact aggregate law under each distinct emission order; reports the largest
/// total-variation distance to the first order.
ExperimentReport abelian_orders(const std::vector<std::int64_t>& levels, std::uint32_t max_particles);

/// expected_exit_count over a sweep of L; the verdict compares the largest L
/// with (2r + 1) #targets / 2 at relative tolerance `tolerance`.
ExperimentReport exit_counts(std::uint32_t r, std::uint32_t r_prime, const std::vector<Site>& targets,
                             const std::vector<std::int64_t>& L_sweep, double tolerance = 0.02);

/// Coupled M-scan of clock forests restricted to Z_K; the verdict asks for at
/// least `required` of the seeds to stabilize within M_limit.
ExperimentReport forest_stabilization(std::uint32_t n, std::uint32_t K,
                                      const std::vector<std::uint32_t>& grid, std::uint32_t M_limit,
                                      const std::vector<std::uint64_t>& seeds,
                                      const AnalysisOptions& options = {}, double required = 0.99);

}  // namespace idla
