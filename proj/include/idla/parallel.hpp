#pragma once

// Replica fan-out. A growth is sequential; independence lives between seeds,
// so the parallel loop runs over the seed list. Results are stored by seed
// position, so the output never depends on scheduling.

#include <cstdint>
#include <exception>
#include <span>
#include <type_traits>
#include <vector>

#include <omp.h>

namespace idla {

struct Execution {
  /// Worker threads; 0 means all hardware threads.
  int jobs = 0;
  /// Use the serial reference loop.
  bool serial = false;
};

inline int resolve_jobs(int jobs) { return jobs > 0 ? jobs : omp_get_num_procs(); }

/// Reference implementation: one seed after the other.
template <class Fn>
auto run_replicas_serial(std::span<const std::uint64_t> seeds, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::uint64_t>> {
  std::vector<std::invoke_result_t<Fn&, std::uint64_t>> out;
  out.reserve(seeds.size());
  for (std::uint64_t seed : seeds) out.push_back(fn(seed));
  return out;
}

template <class Fn>
auto run_replicas_parallel(std::span<const std::uint64_t> seeds, Fn&& fn, int jobs = 0)
    -> std::vector<std::invoke_result_t<Fn&, std::uint64_t>> {
  using Result = std::invoke_result_t<Fn&, std::uint64_t>;
  static_assert(std::is_default_constructible_v<Result>);
  static_assert(!std::is_same_v<Result, bool>, "vector<bool> elements are not thread-safe");
  std::vector<Result> out(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  const auto count = static_cast<std::int64_t>(seeds.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_jobs(jobs))
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = fn(seeds[static_cast<std::size_t>(i)]);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  // Report the failure of the first seed in list order.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

template <class Fn>
auto run_replicas(std::span<const std::uint64_t> seeds, Fn&& fn, const Execution& exec = {})
    -> std::vector<std::invoke_result_t<Fn&, std::uint64_t>> {
  if (exec.serial) return run_replicas_serial(seeds, fn);
  return run_replicas_parallel(seeds, fn, exec.jobs);
}

/// Seeds first, first + 1, ..., first + count - 1.
inline std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = first + i;
  return seeds;
}

}  // namespace idla
