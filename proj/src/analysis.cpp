#include "idla/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "idla/forest.hpp"
#include "idla/oracle.hpp"
#include "idla/stats.hpp"

namespace idla {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num(std::int64_t v) { return std::to_string(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }
std::string num(std::uint32_t v) { return std::to_string(v); }

std::string short_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string join_sites(const std::vector<Site>& sites) {
  std::string out;
  for (Site s : sites) {
    if (!out.empty()) out += ';';
    out += "(" + std::to_string(s.x) + "," + std::to_string(s.y) + ")";
  }
  return out;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void require_seeds(const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ConfigError("experiment needs at least one seed");
}

/// Bootstrap standard error of a statistic of one sample, resampled with a
/// generator keyed by `key`, so the value is reproducible.
template <class Statistic>
double bootstrap_se(const std::vector<double>& xs, Statistic stat, std::uint64_t key,
                    std::size_t resamples = 200) {
  if (xs.size() < 2) return 0.0;
  KeyedSequence rng(key, Stream::permutation, xs.size());
  std::vector<double> values;
  values.reserve(resamples);
  std::vector<double> sample(xs.size());
  for (std::size_t b = 0; b < resamples; ++b) {
    for (double& v : sample) v = xs[rng.below(xs.size())];
    values.push_back(stat(sample));
  }
  return stats::mean_se(values).se * std::sqrt(static_cast<double>(resamples));
}

Estimate make_estimate(std::string name, const stats::MeanSe& m) {
  return {std::move(name), m.mean, m.se, m.samples};
}

}  // namespace

bool ExperimentReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

const Estimate& ExperimentReport::estimate(const std::string& name) const {
  for (const Estimate& e : estimates) {
    if (e.name == name) return e;
  }
  throw std::out_of_range("no estimate named " + name);
}

const Verdict& ExperimentReport::verdict(const std::string& name) const {
  for (const Verdict& v : verdicts) {
    if (v.name == name) return v;
  }
  throw std::out_of_range("no verdict named " + name);
}

Aggregate grow_replica(Variant variant, std::uint32_t n, std::uint32_t M, std::uint64_t seed,
                       WalkMode walk) {
  if (variant == Variant::classical) return build_classical(n, seed, walk);
  GrowthSpec spec;
  spec.n = n;
  spec.M = M;
  spec.variant = variant;
  spec.seed = seed;
  spec.walk = walk;
  return grow(spec).aggregate;
}

// --- widths ---------------------------------------------------------------

ExperimentReport width_per_level(Variant variant, std::uint32_t n, std::uint32_t M,
                                 const std::vector<std::int64_t>& rows,
                                 const std::vector<std::uint64_t>& seeds,
                                 const AnalysisOptions& options) {
  require_seeds(seeds);
  if (rows.empty()) throw ConfigError("width_per_level needs at least one row");
  for (std::int64_t r : rows) {
    if (std::abs(r) > static_cast<std::int64_t>(M) && variant != Variant::classical) {
      throw ConfigError("width rows must lie within the source segment");
    }
  }
  Stopwatch clock;
  ExperimentReport report;
  report.id = "width";
  report.parameters = {{"variant", std::string(to_string(variant))},
                       {"n", num(n)},
                       {"M", num(M)},
                       {"seeds", num(seeds.size())}};
  report.columns = {"seed", "row", "width"};

  auto widths = run_replicas(
      std::span<const std::uint64_t>(seeds),
      [&](std::uint64_t seed) {
        const Aggregate a = grow_replica(variant, n, M, seed, options.walk);
        std::vector<double> w;
        for (std::int64_t r : rows) w.push_back(static_cast<double>(a.row_count(r)));
        return w;
      },
      options.exec);

  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<double> column;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      column.push_back(widths[i][r]);
      report.records.push_back({num(seeds[i]), num(rows[r]), num(widths[i][r])});
    }
    const auto m = stats::mean_se(column);
    report.estimates.push_back(make_estimate("width[" + std::to_string(rows[r]) + "]", m));
    if (variant != Variant::classical) {
      const double rel = std::abs(m.mean - n) / n;
      report.verdicts.push_back({"width[" + std::to_string(rows[r]) + "] within 5% of n",
                                 rel <= 0.05,
                                 "mean " + short_num(m.mean) + " +- " + short_num(m.se) +
                                     ", relative error " + short_num(rel)});
    }
  }
  report.wall_seconds = clock.seconds();
  return report;
}

// --- shape ----------------------------------------------------------------

ShapeDeviation shape_deviation(const Aggregate& a, std::uint32_t n, std::uint32_t K) {
  ShapeDeviation d;
  d.n = n;
  d.K = K;
  const double half = 0.5 * n;
  const auto reach = static_cast<std::int64_t>(std::floor(half));
  const auto k = static_cast<std::int64_t>(K);
  for (std::int64_t y = -k; y <= k; ++y) {
    // Closest hole to the axis in the target rectangle.
    for (std::int64_t x = 0; x <= reach; ++x) {
      if (!a.contains({x, y}) || !a.contains({-x, y})) {
        d.inner = std::max(d.inner, half - static_cast<double>(x));
        break;
      }
    }
  }
  for (Site s : a.sites()) {
    if (std::abs(s.y) <= k) d.outer = std::max(d.outer, static_cast<double>(std::abs(s.x)) - half);
  }
  return d;
}

ExperimentReport shape_deviation_scan(Variant variant, const std::vector<std::uint32_t>& n_list,
                                      std::uint32_t K, const MRule& M_rule,
                                      const std::vector<std::uint64_t>& seeds,
                                      const AnalysisOptions& options) {
  require_seeds(seeds);
  if (n_list.empty()) throw ConfigError("shape scan needs at least one n");
  Stopwatch clock;
  ExperimentReport report;
  report.id = "shape";
  report.parameters = {{"variant", std::string(to_string(variant))},
                       {"K", num(K)},
                       {"seeds", num(seeds.size())}};
  report.columns = {"n", "M", "seed", "inner", "outer", "deviation"};

  std::vector<std::vector<double>> worst(n_list.size());
  for (std::size_t j = 0; j < n_list.size(); ++j) {
    const std::uint32_t n = n_list[j];
    const std::uint32_t M = M_rule ? M_rule(n) : K * K;
    if (variant != Variant::classical && M < K * K) {
      throw ConfigError("shape scan requires M >= K^2 for stabilization");
    }
    report.parameters.emplace_back("M[" + std::to_string(n) + "]", num(M));
    auto devs = run_replicas(
        std::span<const std::uint64_t>(seeds),
        [&](std::uint64_t seed) {
          return shape_deviation(grow_replica(variant, n, M, seed, options.walk), n, K);
        },
        options.exec);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      worst[j].push_back(devs[i].worst());
      report.records.push_back({num(n), num(M), num(seeds[i]), num(devs[i].inner),
                                num(devs[i].outer), num(devs[i].worst())});
    }
  }

  std::vector<double> medians;
  std::vector<double> log_n;
  std::vector<double> ns;
  for (std::size_t j = 0; j < n_list.size(); ++j) {
    const std::string tag = "[" + std::to_string(n_list[j]) + "]";
    const double med = stats::median(worst[j]);
    medians.push_back(med);
    log_n.push_back(std::log(static_cast<double>(n_list[j])));
    ns.push_back(static_cast<double>(n_list[j]));
    report.estimates.push_back({"median_deviation" + tag, med,
                                bootstrap_se(worst[j], stats::median, seeds.front() + j),
                                worst[j].size()});
    report.estimates.push_back(make_estimate("mean_deviation" + tag, stats::mean_se(worst[j])));
    report.verdicts.push_back({"median_deviation" + tag + " <= n/8", med <= ns[j] / 8.0,
                               "median " + short_num(med) + ", n/8 = " + short_num(ns[j] / 8.0)});
  }

  if (n_list.size() >= 2) {
    // Least-squares fits over every replicate, bootstrapped by resampling seeds within each n.
    auto fit = [&](const std::vector<std::vector<double>>& w, bool use_log) {
      std::vector<double> x;
      std::vector<double> y;
      for (std::size_t j = 0; j < w.size(); ++j) {
        for (double v : w[j]) {
          x.push_back(use_log ? log_n[j] : ns[j]);
          y.push_back(v);
        }
      }
      return stats::slope(x, y);
    };
    const double slope_log = fit(worst, true);
    const double slope_lin = fit(worst, false);
    KeyedSequence rng(seeds.front(), Stream::permutation, 0x51A7E);
    std::vector<double> boot_log;
    std::vector<double> boot_lin;
    for (int b = 0; b < 200; ++b) {
      std::vector<std::vector<double>> resampled;
      for (const auto& w : worst) {
        std::vector<double> sample(w.size());
        for (double& v : sample) v = w[rng.below(w.size())];
        resampled.push_back(std::move(sample));
      }
      boot_log.push_back(fit(resampled, true));
      boot_lin.push_back(fit(resampled, false));
    }
    const double se_log = stats::mean_se(boot_log).se * std::sqrt(200.0);
    const double se_lin = stats::mean_se(boot_lin).se * std::sqrt(200.0);
    report.estimates.push_back({"slope_vs_log_n", slope_log, se_log, n_list.size()});
    report.estimates.push_back({"slope_vs_n", slope_lin, se_lin, n_list.size()});

    bool ratio_decreasing = true;
    for (std::size_t j = 1; j < medians.size(); ++j) {
      ratio_decreasing = ratio_decreasing && medians[j] / ns[j] < medians[j - 1] / ns[j - 1];
    }
    report.verdicts.push_back({"median/n decreasing in n", ratio_decreasing, ""});
    report.verdicts.push_back({"slope vs log n positive", slope_log > 0,
                               "slope " + short_num(slope_log) + " +- " + short_num(se_log)});
  }
  report.wall_seconds = clock.seconds();
  return report;
}

// --- far particles --------------------------------------------------------

std::int64_t far_threshold(std::uint32_t M, double alpha) {
  if (alpha <= 1.0) throw ConfigError("far-particle exponent alpha must exceed 1");
  auto t = static_cast<std::int64_t>(std::floor(std::pow(static_cast<double>(M), alpha)));
  // Guard against pow rounding just below an exact integer power.
  while (std::pow(static_cast<double>(M), alpha) >= static_cast<double>(t + 1)) ++t;
  return t;
}

ExperimentReport far_particle_monitor(Variant variant, std::uint32_t n,
                                      const std::vector<std::uint32_t>& M_grid, double alpha,
                                      const std::function<std::uint32_t(std::uint32_t)>& far_levels,
                                      const std::vector<std::uint64_t>& seeds,
                                      const AnalysisOptions& options) {
  require_seeds(seeds);
  if (M_grid.empty()) throw ConfigError("far-particle monitor needs an M grid");
  if (variant == Variant::classical) throw ConfigError("far-particle monitor needs line sources");
  Stopwatch clock;
  ExperimentReport report;
  report.id = "far";
  report.parameters = {{"variant", std::string(to_string(variant))},
                       {"n", num(n)},
                       {"alpha", num(alpha)},
                       {"seeds", num(seeds.size())}};
  report.columns = {"M", "threshold", "levels", "seed", "far_particles", "touching", "touched"};

  std::vector<double> freq;
  for (std::uint32_t M : M_grid) {
    const std::int64_t threshold = far_threshold(M, alpha);
    const std::uint32_t extra = far_levels ? far_levels(M) : M;
    const auto top = static_cast<std::uint32_t>(threshold) + extra;
    struct Row {
      std::uint64_t far = 0;
      std::uint64_t touching = 0;
    };
    auto rows = run_replicas(
        std::span<const std::uint64_t>(seeds),
        [&](std::uint64_t seed) {
          GrowthSpec spec;
          spec.n = n;
          spec.M = top;
          spec.variant = variant;
          spec.seed = seed;
          spec.walk = options.walk;
          spec.monitors = {Region::strip(M)};
          const GrowthRun run = grow(spec);
          Row row;
          for (const ParticleRecord& p : run.particles) {
            if (std::abs(p.emission.level) <= threshold) continue;
            ++row.far;
            if (p.visited.at(0)) ++row.touching;
          }
          return row;
        },
        options.exec);
    std::size_t touched = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const bool hit = rows[i].touching > 0;
      touched += hit;
      report.records.push_back({num(M), num(threshold), num(top), num(seeds[i]), num(rows[i].far),
                                num(rows[i].touching), hit ? "1" : "0"});
    }
    const auto p = stats::proportion(touched, seeds.size());
    freq.push_back(p.mean);
    report.estimates.push_back(make_estimate("touch_frequency[" + std::to_string(M) + "]", p));
  }

  bool decreasing = true;
  for (std::size_t j = 1; j < freq.size(); ++j) decreasing = decreasing && freq[j] < freq[j - 1];
  std::string trend;
  for (double f : freq) trend += (trend.empty() ? "" : " > ") + short_num(f);
  report.verdicts.push_back({"touch frequency strictly decreasing in M", decreasing, trend});
  report.verdicts.push_back({"touch frequency zero at largest M", freq.back() == 0.0,
                             "frequency " + short_num(freq.back())});
  report.wall_seconds = clock.seconds();
  return report;
}

// --- height process -------------------------------------------------------

HeightTrace height_trace(const UpwardTrajectory& traj) {
  HeightTrace trace;
  trace.M = traj.M;
  for (std::int64_t t = traj.M; t <= traj.t_max; ++t) trace.heights.push_back(traj.height(t));
  return trace;
}

std::vector<std::int64_t> HeightTrace::hitting_times(double zeta, std::size_t how_many) const {
  std::vector<std::int64_t> out;
  for (std::size_t i = 1; i < heights.size() && out.size() < how_many; ++i) {
    // An empty aggregate has height -infinity.
    if (!heights[i] || static_cast<double>(*heights[i]) <= zeta) {
      out.push_back(static_cast<std::int64_t>(M + i));
    }
  }
  return out;
}

ExperimentReport height_drift(Variant variant, std::uint32_t n, std::uint32_t M,
                              const std::vector<double>& zeta_grid, std::int64_t t_max,
                              const std::vector<std::uint64_t>& seeds,
                              const AnalysisOptions& options) {
  require_seeds(seeds);
  if (zeta_grid.empty()) throw ConfigError("height drift needs a zeta grid");
  if (t_max <= static_cast<std::int64_t>(M)) throw ConfigError("height drift needs t_max > M");
  Stopwatch clock;
  ExperimentReport report;
  report.id = "height";
  report.parameters = {{"variant", std::string(to_string(variant))},
                       {"n", num(n)},
                       {"M", num(M)},
                       {"t_max", num(t_max)},
                       {"seeds", num(seeds.size())}};
  report.columns = {"seed", "zeta", "steps_above", "increment_sum", "tau1", "tau2"};

  auto traces = run_replicas(
      std::span<const std::uint64_t>(seeds),
      [&](std::uint64_t seed) {
        GrowthSpec spec;
        spec.n = n;
        spec.M = M;
        spec.variant = variant;
        spec.seed = seed;
        spec.walk = options.walk;
        return height_trace(grow_upward(spec, UpwardBase::aggregate, t_max));
      },
      options.exec);

  std::vector<double> drift;
  std::vector<double> drift_se;
  std::vector<double> tau1_rate;
  for (double zeta : zeta_grid) {
    const std::string tag = "[" + short_num(zeta) + "]";
    double sum = 0;
    double count = 0;
    std::vector<double> sums;
    std::vector<double> counts;
    std::size_t tau1 = 0;
    std::size_t tau2 = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const auto& h = traces[i].heights;
      double s = 0;
      double c = 0;
      for (std::size_t t = 0; t + 1 < h.size(); ++t) {
        if (!h[t] || !h[t + 1] || static_cast<double>(*h[t]) <= zeta) continue;
        s += static_cast<double>(*h[t + 1] - *h[t]);
        c += 1;
      }
      sums.push_back(s);
      counts.push_back(c);
      sum += s;
      count += c;
      const auto hits = traces[i].hitting_times(zeta, 2);
      tau1 += hits.size() >= 1;
      tau2 += hits.size() >= 2;
      report.records.push_back({num(seeds[i]), num(zeta), num(c), num(s),
                                hits.size() >= 1 ? num(hits[0]) : "",
                                hits.size() >= 2 ? num(hits[1]) : ""});
    }
    // Ratio estimator with a seed-clustered standard error.
    const double ratio = count > 0 ? sum / count : std::nan("");
    double var = 0;
    const auto m = static_cast<double>(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const double r = sums[i] - ratio * counts[i];
      var += r * r;
    }
    const double se = (count > 0 && m > 1) ? std::sqrt(var * m / (m - 1)) / count : std::nan("");
    drift.push_back(ratio);
    drift_se.push_back(se);
    report.estimates.push_back({"drift" + tag, ratio, se, static_cast<std::size_t>(count)});
    const auto p1 = stats::proportion(tau1, seeds.size());
    tau1_rate.push_back(p1.mean);
    report.estimates.push_back(make_estimate("tau1_realized" + tag, p1));
    report.estimates.push_back(make_estimate("tau2_realized" + tag, stats::proportion(tau2, seeds.size())));
  }

  const double top_drift = drift.back();
  const double top_se = drift_se.back();
  report.verdicts.push_back({"drift negative at 3 sigma at top zeta",
                             std::isfinite(top_drift) && top_drift + 3 * top_se < 0,
                             "drift " + short_num(top_drift) + " +- " + short_num(top_se)});
  report.verdicts.push_back({"tau1 realized in >= 99% of seeds at top zeta", tau1_rate.back() >= 0.99,
                             "rate " + short_num(tau1_rate.back())});
  report.wall_seconds = clock.seconds();
  return report;
}

// --- empty lines and components -------------------------------------------

LineStatistics line_statistics(const Aggregate& a, std::int64_t lo, std::int64_t hi) {
  LineStatistics out;
  std::vector<std::size_t> per_row(static_cast<std::size_t>(hi - lo + 1), 0);
  std::vector<Site> window_sites;
  for (Site s : a.sites()) {
    if (s.y < lo || s.y > hi) continue;
    ++per_row[static_cast<std::size_t>(s.y - lo)];
    window_sites.push_back(s);
  }
  for (std::int64_t y = lo; y <= hi; ++y) {
    if (per_row[static_cast<std::size_t>(y - lo)] == 0) out.empty_levels.push_back(y);
  }
  out.axis_empty = lo <= 0 && 0 <= hi && per_row[static_cast<std::size_t>(-lo)] == 0;

  std::unordered_set<Site, SiteHash> unvisited(window_sites.begin(), window_sites.end());
  std::vector<Site> stack;
  for (Site s : window_sites) {
    if (!unvisited.erase(s)) continue;
    ++out.components;
    stack.push_back(s);
    while (!stack.empty()) {
      const Site cur = stack.back();
      stack.pop_back();
      for (Site nb : neighbors(cur)) {
        if (unvisited.erase(nb)) stack.push_back(nb);
      }
    }
  }
  return out;
}

ExperimentReport empty_lines(Variant variant, std::uint32_t n, std::uint32_t M,
                             std::pair<std::int64_t, std::int64_t> window,
                             const std::vector<std::uint64_t>& seeds,
                             const AnalysisOptions& options) {
  require_seeds(seeds);
  const auto [lo, hi] = window;
  if (lo > hi || 2 * std::abs(lo) > static_cast<std::int64_t>(M) ||
      2 * std::abs(hi) > static_cast<std::int64_t>(M)) {
    throw ConfigError("empty-lines window must lie within [-M/2, M/2]");
  }
  Stopwatch clock;
  ExperimentReport report;
  report.id = "lines";
  report.parameters = {{"variant", std::string(to_string(variant))},
                       {"n", num(n)},
                       {"M", num(M)},
                       {"window", num(lo) + ".." + num(hi)},
                       {"seeds", num(seeds.size())}};
  report.columns = {"seed", "empty_lines", "axis_empty", "components", "empty_levels"};

  auto lines = run_replicas(
      std::span<const std::uint64_t>(seeds),
      [&](std::uint64_t seed) {
        return line_statistics(grow_replica(variant, n, M, seed, options.walk), lo, hi);
      },
      options.exec);

  std::size_t axis_empty = 0;
  std::size_t multi = 0;
  std::vector<double> empties;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& l = lines[i];
    axis_empty += l.axis_empty;
    multi += l.components >= 2;
    empties.push_back(static_cast<double>(l.empty_levels.size()));
    std::string levels;
    for (std::int64_t y : l.empty_levels) levels += (levels.empty() ? "" : ";") + std::to_string(y);
    report.records.push_back({num(seeds[i]), num(l.empty_levels.size()), l.axis_empty ? "1" : "0",
                              num(l.components), levels});
  }
  report.estimates.push_back(make_estimate("axis_empty_frequency", stats::proportion(axis_empty, seeds.size())));
  report.estimates.push_back(make_estimate("mean_empty_lines", stats::mean_se(empties)));
  report.estimates.push_back(make_estimate("multi_component_frequency", stats::proportion(multi, seeds.size())));
  if (variant == Variant::deterministic) {
    report.verdicts.push_back({"no empty axis for the deterministic variant", axis_empty == 0,
                               num(axis_empty) + " seeds with an empty axis"});
  } else if (variant != Variant::classical) {
    report.verdicts.push_back({"empty axis observed for a Poisson variant", axis_empty > 0,
                               num(axis_empty) + " seeds with an empty axis"});
  }
  report.wall_seconds = clock.seconds();
  return report;
}

// --- mixing ---------------------------------------------------------------

namespace {

bool misses(const Aggregate& a, const std::vector<Site>& sites) {
  return std::none_of(sites.begin(), sites.end(), [&](Site s) { return a.contains(s); });
}

std::int64_t diameter(const std::vector<Site>& sites) {
  std::int64_t d = 0;
  for (Site a : sites) {
    for (Site b : sites) d = std::max(d, std::abs(a.x - b.x) + std::abs(a.y - b.y));
  }
  return d;
}

std::int64_t max_abs_y(const std::vector<Site>& sites) {
  std::int64_t m = 0;
  for (Site s : sites) m = std::max(m, std::abs(s.y));
  return m;
}

}  // namespace

std::vector<Site> translate(const std::vector<Site>& pattern, std::int64_t k) {
  std::vector<Site> out;
  for (Site s : pattern) out.push_back({s.x, s.y + k});
  return out;
}

std::vector<Site> reflect_horizontal(const std::vector<Site>& pattern, std::int64_t k) {
  std::vector<Site> out;
  for (Site s : pattern) out.push_back({s.x, k - s.y});
  return out;
}

std::vector<Site> reflect_vertical(const std::vector<Site>& pattern) {
  std::vector<Site> out;
  for (Site s : pattern) out.push_back({-s.x, s.y});
  return out;
}

ExperimentReport mixing_correlation(Variant variant, std::uint32_t n, std::uint32_t M,
                                    const std::vector<Site>& C1, const std::vector<Site>& C2,
                                    const std::vector<std::int64_t>& k_grid,
                                    const std::vector<std::uint64_t>& seeds,
                                    const AnalysisOptions& options,
                                    std::size_t bootstrap_resamples) {
  require_seeds(seeds);
  if (C1.empty() || C2.empty() || k_grid.empty()) throw ConfigError("mixing needs C1, C2 and a k grid");
  const std::int64_t k_max = *std::max_element(k_grid.begin(), k_grid.end());
  if (k_max + diameter(C2) > static_cast<std::int64_t>(M) / 2) {
    throw ConfigError("mixing requires max k + diam(C2) <= M/2");
  }
  Stopwatch clock;
  ExperimentReport report;
  report.id = "mixing";
  report.parameters = {{"variant", std::string(to_string(variant))},
                       {"n", num(n)},
                       {"M", num(M)},
                       {"C1", join_sites(C1)},
                       {"C2", join_sites(C2)},
                       {"seeds", num(seeds.size())}};
  report.columns = {"seed", "k", "misses_C1", "misses_C2", "misses_shifted_C2"};

  struct Row {
    bool c1 = false;
    bool c2 = false;
    std::vector<char> shifted;
  };
  auto rows = run_replicas(
      std::span<const std::uint64_t>(seeds),
      [&](std::uint64_t seed) {
        const Aggregate a = grow_replica(variant, n, M, seed, options.walk);
        Row r;
        r.c1 = misses(a, C1);
        r.c2 = misses(a, C2);
        for (std::int64_t k : k_grid) r.shifted.push_back(misses(a, translate(C2, k)));
        return r;
      },
      options.exec);

  const auto N = static_cast<double>(seeds.size());
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  for (const Row& r : rows) {
    n1 += r.c1;
    n2 += r.c2;
  }
  const double p1 = static_cast<double>(n1) / N;
  const double p2 = static_cast<double>(n2) / N;
  report.estimates.push_back(make_estimate("p_miss_C1", stats::proportion(n1, seeds.size())));
  report.estimates.push_back(make_estimate("p_miss_C2", stats::proportion(n2, seeds.size())));

  std::vector<double> abs_boot_median;
  std::vector<double> rho;
  std::vector<double> rho_se;
  for (std::size_t j = 0; j < k_grid.size(); ++j) {
    const std::string tag = "[" + std::to_string(k_grid[j]) + "]";
    std::vector<double> x(seeds.size());
    std::vector<double> z(seeds.size());
    std::vector<double> xy(seeds.size());
    double joint = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      x[i] = rows[i].c1;
      z[i] = rows[i].c2;
      xy[i] = rows[i].c1 && rows[i].shifted[j];
      joint += xy[i];
      report.records.push_back({num(seeds[i]), num(k_grid[j]), rows[i].c1 ? "1" : "0",
                                rows[i].c2 ? "1" : "0", rows[i].shifted[j] ? "1" : "0"});
    }
    joint /= N;
    const double value = joint - p1 * p2;
    // Delta-method error from the influence function of joint - p1 p2.
    std::vector<double> psi(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      psi[i] = (xy[i] - joint) - p2 * (x[i] - p1) - p1 * (z[i] - p2);
    }
    const double se = stats::mean_se(psi).se;
    rho.push_back(value);
    rho_se.push_back(se);
    report.estimates.push_back({"rho" + tag, value, se, seeds.size()});

    KeyedSequence rng(seeds.front(), Stream::permutation, 0xB007 + j);
    std::vector<double> boot;
    for (std::size_t b = 0; b < bootstrap_resamples; ++b) {
      double sx = 0, sz = 0, sxy = 0;
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        const std::size_t pick = rng.below(seeds.size());
        sx += x[pick];
        sz += z[pick];
        sxy += xy[pick];
      }
      boot.push_back(std::abs(sxy / N - (sx / N) * (sz / N)));
    }
    const double med = stats::median(boot);
    abs_boot_median.push_back(med);
    report.estimates.push_back({"abs_rho_bootstrap_median" + tag, med,
                                bootstrap_resamples > 1 ? stats::mean_se(boot).se *
                                                              std::sqrt(double(bootstrap_resamples))
                                                        : 0.0,
                                bootstrap_resamples});
  }

  const std::size_t last = static_cast<std::size_t>(
      std::max_element(k_grid.begin(), k_grid.end()) - k_grid.begin());
  report.verdicts.push_back({"|rho| at largest k within 3 sigma of 0",
                             std::abs(rho[last]) <= 3 * rho_se[last],
                             "rho " + short_num(rho[last]) + " +- " + short_num(rho_se[last])});
  if (auto one = std::find(k_grid.begin(), k_grid.end(), 1); one != k_grid.end()) {
    const auto j1 = static_cast<std::size_t>(one - k_grid.begin());
    report.verdicts.push_back({"bootstrap |rho| at largest k <= at k = 1",
                               abs_boot_median[last] <= abs_boot_median[j1],
                               short_num(abs_boot_median[last]) + " vs " + short_num(abs_boot_median[j1])});
  }
  report.wall_seconds = clock.seconds();
  return report;
}

// --- symmetries -----------------------------------------------------------

ExperimentReport symmetry_checks(Variant variant, std::uint32_t n, std::uint32_t M,
                                 const std::vector<Site>& pattern, std::int64_t k,
                                 const std::vector<std::uint64_t>& seeds,
                                 const AnalysisOptions& options) {
  require_seeds(seeds);
  if (pattern.empty()) throw ConfigError("symmetry checks need a pattern");
  const std::vector<std::pair<std::string, std::vector<Site>>> images = {
      {"pattern", pattern},
      {"translated", translate(pattern, k)},
      {"reflected_horizontal", reflect_horizontal(pattern, k)},
      {"reflected_vertical", reflect_vertical(pattern)},
  };
  for (const auto& [name, sites] : images) {
    if (2 * max_abs_y(sites) > static_cast<std::int64_t>(M)) {
      throw ConfigError("symmetry images must stay within |y| <= M/2");
    }
  }
  Stopwatch clock;
  ExperimentReport report;
  report.id = "symmetry";
  report.parameters = {{"variant", std::string(to_string(variant))},
                       {"n", num(n)},
                       {"M", num(M)},
                       {"k", num(k)},
                       {"pattern", join_sites(pattern)},
                       {"seeds", num(seeds.size())}};
  report.columns = {"seed", "pattern", "translated", "reflected_horizontal", "reflected_vertical"};

  auto rows = run_replicas(
      std::span<const std::uint64_t>(seeds),
      [&](std::uint64_t seed) {
        const Aggregate a = grow_replica(variant, n, M, seed, options.walk);
        std::vector<char> hit;
        for (const auto& [name, sites] : images) {
          hit.push_back(std::all_of(sites.begin(), sites.end(), [&](Site s) { return a.contains(s); }));
        }
        return hit;
      },
      options.exec);

  std::vector<stats::MeanSe> p;
  for (std::size_t j = 0; j < images.size(); ++j) {
    std::size_t hits = 0;
    for (const auto& r : rows) hits += r[j];
    p.push_back(stats::proportion(hits, seeds.size()));
    report.estimates.push_back(make_estimate("p[" + images[j].first + "]", p.back()));
  }
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    std::vector<std::string> rec{num(seeds[i])};
    for (char c : rows[i]) rec.push_back(c ? "1" : "0");
    report.records.push_back(std::move(rec));
  }
  for (std::size_t j = 1; j < images.size(); ++j) {
    report.verdicts.push_back({images[j].first + " within 3 sigma of pattern",
                               stats::within_sigma(p[0].mean, p[0].se, p[j].mean, p[j].se),
                               short_num(p[0].mean) + " vs " + short_num(p[j].mean)});
  }
  report.wall_seconds = clock.seconds();
  return report;
}

// --- forest statistics ----------------------------------------------------

namespace {

Forest clock_forest(std::uint32_t n, std::uint32_t M, std::uint64_t seed, WalkMode walk) {
  GrowthSpec spec;
  spec.n = n;
  spec.M = M;
  spec.variant = Variant::poisson_clock;
  spec.seed = seed;
  spec.walk = walk;
  return build_forest(grow(spec).aggregate);
}

}  // namespace

ExperimentReport branch_deviation_scan(const std::vector<std::uint32_t>& distances,
                                       const std::function<std::uint32_t(std::uint32_t)>& particles_for,
                                       const std::function<std::uint32_t(std::uint32_t)>& M_for,
                                       const std::vector<std::uint64_t>& seeds,
                                       const AnalysisOptions& options) {
  require_seeds(seeds);
  if (distances.empty()) throw ConfigError("branch scan needs target distances");
  Stopwatch clock;
  ExperimentReport report;
  report.id = "branch";
  report.parameters = {{"seeds", num(seeds.size())}};
  report.columns = {"d", "particles", "M", "seed", "occupied", "max_y", "min_y", "branch_length"};

  struct Row {
    bool occupied = false;
    std::int64_t max_y = 0;
    std::int64_t min_y = 0;
    std::size_t length = 0;
  };
  std::vector<double> medians;
  for (std::uint32_t d : distances) {
    const std::uint32_t n = particles_for(d);
    const std::uint32_t M = M_for(d);
    report.parameters.emplace_back("n[" + std::to_string(d) + "]", num(n));
    report.parameters.emplace_back("M[" + std::to_string(d) + "]", num(M));
    auto rows = run_replicas(
        std::span<const std::uint64_t>(seeds),
        [&](std::uint64_t seed) {
          const Forest f = clock_forest(n, M, seed, options.walk);
          Row r;
          const Site target{static_cast<std::int64_t>(d), 0};
          if (!f.contains(target)) return r;
          const BranchDeviation b = branch_deviation(f, target);
          r.occupied = true;
          r.max_y = b.max_y;
          r.min_y = b.min_y;
          r.length = b.branch.sites.size();
          return r;
        },
        options.exec);
    std::vector<double> ratios;
    std::size_t occupied = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const Row& r = rows[i];
      report.records.push_back({num(d), num(n), num(M), num(seeds[i]), r.occupied ? "1" : "0",
                                r.occupied ? num(r.max_y) : "", r.occupied ? num(r.min_y) : "",
                                r.occupied ? num(r.length) : ""});
      if (!r.occupied) continue;
      ++occupied;
      ratios.push_back(static_cast<double>(r.max_y) / d);
    }
    const std::string tag = "[" + std::to_string(d) + "]";
    report.estimates.push_back(make_estimate("target_occupied" + tag, stats::proportion(occupied, seeds.size())));
    const double med = stats::median(ratios);
    medians.push_back(med);
    report.estimates.push_back({"median_delta_over_d" + tag, med,
                                bootstrap_se(ratios, stats::median, seeds.front() + d), ratios.size()});
  }
  bool decreasing = true;
  for (std::size_t j = 1; j < medians.size(); ++j) decreasing = decreasing && medians[j] < medians[j - 1];
  report.verdicts.push_back({"median Delta/d decreasing in d", decreasing, ""});
  report.wall_seconds = clock.seconds();
  return report;
}

ExperimentReport spanning_probability(const std::vector<std::uint32_t>& n_list, std::uint32_t M,
                                      const std::vector<Site>& pattern,
                                      const std::vector<std::uint64_t>& seeds,
                                      const AnalysisOptions& options) {
  require_seeds(seeds);
  Stopwatch clock;
  ExperimentReport report;
  report.id = "spanning";
  report.parameters = {{"M", num(M)}, {"pattern", join_sites(pattern)}, {"seeds", num(seeds.size())}};
  report.columns = {"n", "seed", "covered"};
  std::vector<stats::MeanSe> p;
  for (std::uint32_t n : n_list) {
    auto covered = run_replicas(
        std::span<const std::uint64_t>(seeds),
        [&](std::uint64_t seed) -> char {
          const Forest f = clock_forest(n, M, seed, options.walk);
          return std::all_of(pattern.begin(), pattern.end(), [&](Site s) { return f.contains(s); });
        },
        options.exec);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      hits += covered[i];
      report.records.push_back({num(n), num(seeds[i]), covered[i] ? "1" : "0"});
    }
    p.push_back(stats::proportion(hits, seeds.size()));
    report.estimates.push_back(make_estimate("p_covered[" + std::to_string(n) + "]", p.back()));
  }
  bool monotone = true;
  for (std::size_t j = 1; j < p.size(); ++j) {
    const double slack = 3 * std::sqrt(p[j].se * p[j].se + p[j - 1].se * p[j - 1].se);
    monotone = monotone && p[j].mean + slack >= p[j - 1].mean;
  }
  report.verdicts.push_back({"coverage nondecreasing in n (3 sigma)", monotone, ""});
  report.wall_seconds = clock.seconds();
  return report;
}

ExperimentReport forest_pattern_translation(std::uint32_t n, std::uint32_t M,
                                            const std::vector<DirectedEdge>& pattern,
                                            std::int64_t k,
                                            const std::vector<std::uint64_t>& seeds,
                                            const AnalysisOptions& options) {
  require_seeds(seeds);
  if (pattern.empty()) throw ConfigError("forest pattern is empty");
  Stopwatch clock;
  ExperimentReport report;
  report.id = "forest-translation";
  report.parameters = {{"n", num(n)}, {"M", num(M)}, {"k", num(k)}, {"seeds", num(seeds.size())}};
  report.columns = {"seed", "at_origin", "translated"};
  auto occurs = [](const Forest& f, const std::vector<DirectedEdge>& edges, std::int64_t shift) {
    return std::all_of(edges.begin(), edges.end(), [&](const DirectedEdge& e) {
      const ForestVertex* v = f.find({e.to.x, e.to.y + shift});
      return v && v->parent == Site{e.from.x, e.from.y + shift};
    });
  };
  auto rows = run_replicas(
      std::span<const std::uint64_t>(seeds),
      [&](std::uint64_t seed) {
        const Forest f = clock_forest(n, M, seed, options.walk);
        return std::pair<char, char>(occurs(f, pattern, 0), occurs(f, pattern, k));
      },
      options.exec);
  std::size_t a = 0;
  std::size_t b = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    a += rows[i].first;
    b += rows[i].second;
    report.records.push_back({num(seeds[i]), rows[i].first ? "1" : "0", rows[i].second ? "1" : "0"});
  }
  const auto pa = stats::proportion(a, seeds.size());
  const auto pb = stats::proportion(b, seeds.size());
  report.estimates.push_back(make_estimate("p_at_origin", pa));
  report.estimates.push_back(make_estimate("p_translated", pb));
  report.verdicts.push_back({"translated frequency within 3 sigma",
                             stats::within_sigma(pa.mean, pa.se, pb.mean, pb.se),
                             short_num(pa.mean) + " vs " + short_num(pb.mean)});
  report.wall_seconds = clock.seconds();
  return report;
}

// --- oracle and forest-scan reports ---------------------------------------

ExperimentReport abelian_orders(const std::vector<std::int64_t>& levels, std::uint32_t max_particles) {
  if (levels.empty()) throw ConfigError("abelian check needs at least one level");
  if (max_particles > kMaxExactParticles) {
    throw BudgetError("exact aggregate law is limited to " + std::to_string(kMaxExactParticles) + " particles");
  }
  Stopwatch clock;
  ExperimentReport report;
  report.id = "abelian";
  std::string level_list;
  for (std::int64_t l : levels) level_list += (level_list.empty() ? "" : ";") + std::to_string(l);
  report.parameters = {{"levels", level_list}, {"particles", num(max_particles)}, {"orders", "all"}};
  report.columns = {"multiset", "orders", "outcomes", "max_tv"};

  std::vector<std::int64_t> sorted_levels = levels;
  std::sort(sorted_levels.begin(), sorted_levels.end());
  sorted_levels.erase(std::unique(sorted_levels.begin(), sorted_levels.end()), sorted_levels.end());

  double worst = 0;
  std::size_t multisets = 0;
  std::size_t orders_total = 0;
  // Multisets as nondecreasing sequences of level indices.
  for (std::uint32_t size = 1; size <= max_particles; ++size) {
    std::vector<std::size_t> pick(size, 0);
    for (;;) {
      std::vector<std::int64_t> order;
      for (std::size_t i : pick) order.push_back(sorted_levels[i]);
      std::string name;
      for (std::int64_t l : order) name += (name.empty() ? "" : ";") + std::to_string(l);
      AggregateLaw reference;
      std::size_t orders = 0;
      double tv = 0;
      do {
        std::vector<LevelBatch> batches;
        for (std::int64_t l : order) batches.push_back({l, 1});
        AggregateLaw law = exact_small_aggregate_distribution(batches, max_particles);
        if (orders == 0) {
          reference = std::move(law);
        } else {
          tv = std::max(tv, total_variation(reference, law));
        }
        ++orders;
      } while (std::next_permutation(order.begin(), order.end()));
      ++multisets;
      orders_total += orders;
      worst = std::max(worst, tv);
      report.records.push_back({name, num(orders), num(reference.size()), num(tv)});

      std::size_t k = size;
      while (k > 0 && pick[k - 1] + 1 == sorted_levels.size()) --k;
      if (k == 0) break;
      ++pick[k - 1];
      for (std::size_t j = k; j < size; ++j) pick[j] = pick[k - 1];
    }
  }
  report.estimates.push_back({"max_tv", worst, 0.0, orders_total});
  report.estimates.push_back({"multisets", static_cast<double>(multisets), 0.0, multisets});
  char detail[64];
  std::snprintf(detail, sizeof detail, "%.3g", worst);
  report.verdicts.push_back({"max TV distance across orders <= 1e-12", worst <= 1e-12, detail});
  report.wall_seconds = clock.seconds();
  return report;
}

ExperimentReport exit_counts(std::uint32_t r, std::uint32_t r_prime, const std::vector<Site>& targets,
                             const std::vector<std::int64_t>& L_sweep, double tolerance) {
  if (L_sweep.empty()) throw ConfigError("exit counts need an L sweep");
  Stopwatch clock;
  ExperimentReport report;
  report.id = "exit-counts";
  std::string L_list;
  for (std::int64_t L : L_sweep) L_list += (L_list.empty() ? "" : ";") + std::to_string(L);
  report.parameters = {{"r", num(r)}, {"rp", num(r_prime)}, {"tau", join_sites(targets)}, {"L", L_list}};
  report.columns = {"L", "value", "half_height", "expansions"};
  const ExitCountOptions options;
  double last = 0;
  for (std::int64_t L : L_sweep) {
    const ExitCount c = expected_exit_count(r, r_prime, targets, L, options);
    report.records.push_back({num(L), num(c.value), num(c.half_height), num(static_cast<std::uint64_t>(c.expansions))});
    report.estimates.push_back({"exit_count[" + std::to_string(L) + "]", c.value, options.tolerance, 1});
    last = c.value;
  }
  std::unordered_set<Site, SiteHash> distinct(targets.begin(), targets.end());
  const double expected = (2.0 * r + 1.0) * static_cast<double>(distinct.size()) / 2.0;
  const double rel = expected > 0 ? std::abs(last - expected) / expected : std::abs(last);
  report.verdicts.push_back({"exit count within " + short_num(100 * tolerance) + "% of (2r+1)#tau/2",
                             rel <= tolerance,
                             "value " + short_num(last) + ", expected " + short_num(expected)});
  report.wall_seconds = clock.seconds();
  return report;
}

ExperimentReport forest_stabilization(std::uint32_t n, std::uint32_t K,
                                      const std::vector<std::uint32_t>& grid, std::uint32_t M_limit,
                                      const std::vector<std::uint64_t>& seeds,
                                      const AnalysisOptions& options, double required) {
  require_seeds(seeds);
  if (grid.size() < 2 || !std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    throw ConfigError("stabilization grid must be strictly increasing with at least two values");
  }
  Stopwatch clock;
  ExperimentReport report;
  report.id = "stabilize-forest";
  std::string grid_list;
  for (std::uint32_t M : grid) grid_list += (grid_list.empty() ? "" : ";") + std::to_string(M);
  report.parameters = {{"n", num(n)},         {"K", num(K)},
                       {"grid", grid_list},   {"limit", num(M_limit)},
                       {"walk", std::string(to_string(options.walk))},
                       {"seeds", num(seeds.size())}};
  report.columns = {"seed", "stabilized_at", "conclusive"};
  auto rows = run_replicas(
      std::span<const std::uint64_t>(seeds),
      [&](std::uint64_t seed) { return stabilization_radius_one(n, K, grid, seed, options.walk); },
      options.exec);
  std::size_t within = 0;
  std::vector<double> radii;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto [at, conclusive] = rows[i];
    report.records.push_back({num(seeds[i]), num(at), conclusive ? "1" : "0"});
    if (conclusive) radii.push_back(at);
    within += conclusive && at <= M_limit;
  }
  const auto p = stats::proportion(within, seeds.size());
  report.estimates.push_back(make_estimate("fraction_stabilized_within_limit", p));
  report.estimates.push_back({"median_stabilization_M", stats::median(radii),
                              bootstrap_se(radii, stats::median, seeds.front()), radii.size()});
  report.verdicts.push_back({"stabilized within M <= " + num(M_limit) + " for >= " +
                                 short_num(100 * required) + "% of seeds",
                             p.mean >= required, "fraction " + short_num(p.mean)});
  report.wall_seconds = clock.seconds();
  return report;
}

}  // namespace idla
