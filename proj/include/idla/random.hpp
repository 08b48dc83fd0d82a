#pragma once

// Counter-based randomness. Every random quantity in a run is a pure function
// of (master seed, key...), so runs are reproducible, replicas are independent
// streams, and two engines can be coupled exactly by sharing the seed.

#include <cmath>
#include <cstdint>

#include "idla/site.hpp"

namespace idla {

/// Finalizer from MurmurHash3 / SplitMix64. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 33;
  z *= 0xFF51AFD7ED558CCDULL;
  z ^= z >> 33;
  z *= 0xC4CEB9FE1A85EC53ULL;
  z ^= z >> 33;
  return z;
}

/// Domain tags keep the streams used for different purposes disjoint.
enum class Stream : std::uint64_t {
  site_stack = 0x5354414B,       // per-site direction stacks
  particle_walk = 0x5741574B,    // per-particle walks (plain-stream mode)
  arrival = 0x41525256,          // Poisson clock inter-arrival times
  forced_time = 0x464F5243,      // clock times for forced particle counts
  permutation = 0x5045524D,      // random emission orders in tests/tools
};

constexpr std::uint64_t keyed_hash(std::uint64_t seed, Stream stream, std::uint64_t a,
                                   std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = mix64(seed ^ 0x9E3779B97F4A7C15ULL);
  h = mix64(h ^ static_cast<std::uint64_t>(stream));
  h = mix64(h ^ a);
  h = mix64(h ^ (b + 0x632BE59BD9B4E019ULL));
  h = mix64(h ^ (c + 0xD6E8FEB86659FD93ULL));
  return h;
}

/// Uniform double in the open interval (0, 1).
constexpr double to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

constexpr std::uint64_t pack_site(Site s) {
  return static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.x)) |
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.y)) << 32);
}

/// Where the steps of a walk come from.
enum class WalkMode {
  /// Diaconis-Fulton stacks: the k-th visit to a site reads entry k of that
  /// site's stack. Final aggregates are then independent of emission order
  /// path by path, not only in law.
  site_stack,
  /// Each particle owns an independent walk keyed by (level, index).
  particle_stream,
};

/// The randomness substrate of a run. Immutable; consumption counters live in
/// the engine that uses it.
struct StackField {
  std::uint64_t master_seed = 0;
  WalkMode mode = WalkMode::site_stack;

  /// 32 stack entries are packed in each 64-bit block.
  std::uint64_t stack_block(Site s, std::uint64_t block) const {
    return keyed_hash(master_seed, Stream::site_stack, pack_site(s), block, 0);
  }

  std::uint64_t particle_block(std::int64_t level, std::uint64_t index, std::uint64_t block) const {
    return keyed_hash(master_seed, Stream::particle_walk, static_cast<std::uint64_t>(level), index,
                      block);
  }
};

/// Entry k of the direction stack at `site`.
inline Direction stack_direction(const StackField& field, Site site, std::uint64_t k) {
  const std::uint64_t bits = field.stack_block(site, k / 32);
  return static_cast<Direction>((bits >> (2 * (k % 32))) & 3U);
}

/// Sequential generator keyed by a single 64-bit value. Used where a short
/// ordered sequence of uniforms is needed (permutations, bootstrap).
class KeyedSequence {
 public:
  KeyedSequence(std::uint64_t seed, Stream stream, std::uint64_t a, std::uint64_t b = 0)
      : seed_(seed), stream_(stream), a_(a), b_(b) {}

  std::uint64_t next() { return keyed_hash(seed_, stream_, a_, b_, counter_++); }
  double uniform() { return to_open_unit(next()); }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(bound)) % bound;
  }

 private:
  std::uint64_t seed_;
  Stream stream_;
  std::uint64_t a_;
  std::uint64_t b_;
  std::uint64_t counter_ = 0;
};

}  // namespace idla
