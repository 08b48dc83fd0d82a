#include "idla/growth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace idla {

void validate(const GrowthSpec& spec) {
  if (spec.n == 0) throw ConfigError("n must be at least 1");
  if (spec.step_budget == 0) throw ConfigError("step budget must be positive");
  if (spec.order == LevelOrder::clock && spec.variant != Variant::poisson_clock) {
    throw ConfigError("clock order requires the poisson-clock variant");
  }
}

std::vector<std::int64_t> usual_levels(std::uint32_t M) {
  std::vector<std::int64_t> levels;
  levels.reserve(2 * static_cast<std::size_t>(M) + 1);
  levels.push_back(0);
  for (std::int64_t i = 1; i <= static_cast<std::int64_t>(M); ++i) {
    levels.push_back(i);
    levels.push_back(-i);
  }
  return levels;
}

std::vector<double> clock_arrivals(std::uint64_t seed, std::int64_t level, double horizon) {
  std::vector<double> times;
  double t = 0;
  for (std::uint64_t j = 0;; ++j) {
    const double u = to_open_unit(
        keyed_hash(seed, Stream::arrival, static_cast<std::uint64_t>(level), j, 0));
    t += -std::log(u);
    if (t > horizon) break;
    times.push_back(t);
  }
  return times;
}

namespace {

std::vector<double> forced_times(std::uint64_t seed, std::int64_t level, std::uint64_t count,
                                 double horizon) {
  std::vector<double> times(count);
  for (std::uint64_t j = 0; j < count; ++j) {
    times[j] = horizon * to_open_unit(keyed_hash(seed, Stream::forced_time,
                                                 static_cast<std::uint64_t>(level), j, 0));
  }
  std::sort(times.begin(), times.end());
  return times;
}

std::vector<double> level_times(const GrowthSpec& spec, std::int64_t level) {
  const double horizon = static_cast<double>(spec.n);
  if (auto it = spec.forced_counts.find(level); it != spec.forced_counts.end()) {
    return forced_times(spec.seed, level, it->second, horizon);
  }
  return clock_arrivals(spec.seed, level, horizon);
}

std::vector<std::int64_t> source_levels(const GrowthSpec& spec) {
  return spec.variant == Variant::classical ? std::vector<std::int64_t>{0} : usual_levels(spec.M);
}

EmissionPlan usual_plan(const GrowthSpec& spec) {
  EmissionPlan plan;
  for (std::int64_t level : source_levels(spec)) {
    if (spec.variant == Variant::poisson_clock) {
      const auto times = level_times(spec, level);
      for (std::uint64_t j = 0; j < times.size(); ++j) plan.push_back({level, j, times[j]});
    } else {
      const std::uint64_t count = level_count(spec, level);
      for (std::uint64_t j = 0; j < count; ++j) plan.push_back({level, j, std::nullopt});
    }
  }
  return plan;
}

}  // namespace

std::uint64_t level_count(const GrowthSpec& spec, std::int64_t level) {
  if (auto it = spec.forced_counts.find(level); it != spec.forced_counts.end()) return it->second;
  switch (spec.variant) {
    case Variant::deterministic:
    case Variant::classical:
      return spec.n;
    case Variant::poisson_usual:
    case Variant::poisson_clock:
      return clock_arrivals(spec.seed, level, static_cast<double>(spec.n)).size();
  }
  return 0;
}

ClockSchedule draw_clock_schedule(const GrowthSpec& spec) {
  ClockSchedule schedule;
  for (std::int64_t level : usual_levels(spec.M)) {
    const auto times = level_times(spec, level);
    schedule.counts[level] = times.size();
    for (std::uint64_t j = 0; j < times.size(); ++j) schedule.events.push_back({times[j], level, j});
  }
  std::sort(schedule.events.begin(), schedule.events.end(),
            [](const ClockEvent& a, const ClockEvent& b) {
              if (a.time != b.time) return a.time < b.time;
              if (a.level != b.level) return a.level < b.level;
              return a.index < b.index;
            });
  return schedule;
}

EmissionPlan emission_plan(const GrowthSpec& spec) {
  validate(spec);
  const LevelOrder order = spec.order.value_or(
      spec.variant == Variant::poisson_clock ? LevelOrder::clock : LevelOrder::usual);

  EmissionPlan plan;
  if (spec.variant == Variant::poisson_clock &&
      (order == LevelOrder::clock || order == LevelOrder::explicit_permutation)) {
    for (const ClockEvent& e : draw_clock_schedule(spec).events) {
      plan.push_back({e.level, e.index, e.time});
    }
  } else {
    plan = usual_plan(spec);
  }

  if (order == LevelOrder::explicit_permutation) {
    if (spec.permutation.size() != plan.size()) {
      throw ConfigError("permutation length does not match the number of particles");
    }
    std::vector<bool> seen(plan.size(), false);
    EmissionPlan permuted;
    permuted.reserve(plan.size());
    for (std::size_t p : spec.permutation) {
      if (p >= plan.size() || seen[p]) throw ConfigError("permutation is not a bijection");
      seen[p] = true;
      permuted.push_back(plan[p]);
    }
    plan = std::move(permuted);
  }
  return plan;
}

GrowthEngine::GrowthEngine(GrowthParams params, WalkOptions options)
    : cluster_(StackField{params.seed, params.walk}), aggregate_(params), options_(options) {}

ParticleRecord GrowthEngine::emit(const Emission& e) {
  WalkOutcome outcome =
      cluster_.settle(source(e.level), ParticleKey{e.level, e.index}, options_);
  cluster_.insert(outcome.settled_site);
  Provenance p;
  p.birth_index = aggregate_.size() + 1;
  p.source_level = e.level;
  p.particle_index = e.index;
  p.birth_time = e.time;
  p.predecessor = outcome.penultimate_site;
  p.path_length = outcome.path_length;
  aggregate_.add(outcome.settled_site, p);
  ParticleRecord record{e, outcome.settled_site, outcome.path_length, std::move(outcome.visited),
                        std::move(outcome.path)};
  records_.push_back(record);
  return record;
}

void GrowthEngine::emit_all(const EmissionPlan& plan) {
  records_.reserve(records_.size() + plan.size());
  for (const Emission& e : plan) emit(e);
}

GrowthRun GrowthEngine::finish() && { return {std::move(aggregate_), std::move(records_)}; }

namespace {

WalkOptions walk_options(const GrowthSpec& spec) {
  return WalkOptions{spec.monitors, spec.record_paths, spec.step_budget};
}

}  // namespace

GrowthRun grow(const GrowthSpec& spec, const EmissionPlan& plan) {
  validate(spec);
  GrowthEngine engine(spec.params(), walk_options(spec));
  engine.emit_all(plan);
  return std::move(engine).finish();
}

GrowthRun grow(const GrowthSpec& spec) { return grow(spec, emission_plan(spec)); }

namespace {

void require_variant(const GrowthSpec& spec, Variant v, const char* op) {
  if (spec.variant != v) {
    throw ConfigError(std::string(op) + " requires variant " + std::string(to_string(v)));
  }
}

}  // namespace

Aggregate build_deterministic(const GrowthSpec& spec) {
  require_variant(spec, Variant::deterministic, "build_deterministic");
  return grow(spec).aggregate;
}

Aggregate build_poisson_usual(const GrowthSpec& spec) {
  require_variant(spec, Variant::poisson_usual, "build_poisson_usual");
  return grow(spec).aggregate;
}

Aggregate build_poisson_clock(const GrowthSpec& spec) {
  require_variant(spec, Variant::poisson_clock, "build_poisson_clock");
  return grow(spec).aggregate;
}

Aggregate build_classical(std::uint32_t n, std::uint64_t seed, WalkMode walk) {
  GrowthSpec spec;
  spec.n = n;
  spec.M = 0;
  spec.variant = Variant::classical;
  spec.seed = seed;
  spec.walk = walk;
  return grow(spec).aggregate;
}

CoupledPair grow_coupled_pair(const GrowthSpec& spec, std::uint32_t M_small,
                              std::uint32_t M_large) {
  if (M_small > M_large) throw ConfigError("grow_coupled_pair requires M_small <= M_large");
  if (spec.variant == Variant::classical) throw ConfigError("classical runs have a single source");
  GrowthSpec small_spec = spec;
  small_spec.M = M_small;
  GrowthSpec large_spec = spec;
  large_spec.M = M_large;
  const EmissionPlan plan = emission_plan(large_spec);

  const WalkOptions options = walk_options(spec);
  GrowthEngine small(small_spec.params(), options);
  GrowthEngine large(large_spec.params(), options);
  DiscrepancyLog log;
  std::unordered_set<Site, SiteHash> difference;
  std::unordered_map<Site, std::size_t, SiteHash> chain_of;

  const auto small_limit = static_cast<std::int64_t>(M_small);
  for (std::size_t step = 0; step < plan.size(); ++step) {
    const Emission& e = plan[step];
    const Site a = large.emit(e).settled;
    std::optional<Site> s;
    if (std::abs(e.level) <= small_limit) s = small.emit(e).settled;

    std::vector<Site> gained;
    std::vector<Site> resolved;
    auto update = [&](Site x) {
      const bool now = large.aggregate().contains(x) != small.aggregate().contains(x);
      const bool was = difference.contains(x);
      if (now && !was) {
        difference.insert(x);
        gained.push_back(x);
      } else if (!now && was) {
        difference.erase(x);
        resolved.push_back(x);
      }
    };
    update(a);
    if (s && *s != a) update(*s);

    for (Site x : gained) log.events.push_back({step, e, x, std::nullopt});
    for (Site x : resolved) log.events.push_back({step, e, std::nullopt, x});

    if (gained.size() == 1 && resolved.size() == 1 && chain_of.contains(resolved[0])) {
      // The particle settled on a discrepancy in one run and moved on to a new
      // site in the other: the chain relays.
      const std::size_t c = chain_of[resolved[0]];
      chain_of.erase(resolved[0]);
      log.chains[c].relays.push_back(gained[0]);
      chain_of[gained[0]] = c;
    } else {
      for (Site x : resolved) {
        if (auto it = chain_of.find(x); it != chain_of.end()) {
          log.chains[it->second].active = false;
          chain_of.erase(it);
        }
      }
      for (Site x : gained) {
        chain_of[x] = log.chains.size();
        log.chains.push_back({e, {x}, true});
      }
    }
  }

  log.final_difference.assign(difference.begin(), difference.end());
  std::sort(log.final_difference.begin(), log.final_difference.end());
  return {std::move(small).finish(), std::move(large).finish(), std::move(log)};
}

std::optional<std::int64_t> UpwardTrajectory::height(std::int64_t t) const {
  const auto& y = top.at(static_cast<std::size_t>(t - M));
  if (!y) return std::nullopt;
  return *y - t;
}

UpwardTrajectory grow_upward(const GrowthSpec& spec, UpwardBase base, std::int64_t t_max) {
  if (spec.variant != Variant::deterministic && spec.variant != Variant::poisson_usual) {
    throw ConfigError("grow_upward supports the deterministic and poisson-usual variants");
  }
  if (t_max < static_cast<std::int64_t>(spec.M)) throw ConfigError("grow_upward requires t_max >= M");
  validate(spec);

  UpwardTrajectory traj;
  traj.M = spec.M;
  traj.t_max = t_max;
  GrowthEngine engine(spec.params(), walk_options(spec));
  std::optional<std::int64_t> top;
  auto launch = [&](const Emission& e) {
    const Site s = engine.emit(e).settled;
    if (!top || s.y > *top) top = s.y;
  };
  if (base == UpwardBase::aggregate) {
    for (const Emission& e : emission_plan(spec)) launch(e);
  }
  traj.sizes.push_back(engine.aggregate().size());
  traj.top.push_back(top);
  for (std::int64_t t = static_cast<std::int64_t>(spec.M) + 1; t <= t_max; ++t) {
    const std::uint64_t count = level_count(spec, t);
    for (std::uint64_t j = 0; j < count; ++j) launch({t, j, std::nullopt});
    traj.sizes.push_back(engine.aggregate().size());
    traj.top.push_back(top);
  }
  traj.run = std::move(engine).finish();
  return traj;
}

}  // namespace idla
