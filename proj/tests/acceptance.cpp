// Acceptance run: one PASS/FAIL line per criterion, each with its runtime limit.
//
//   idla_acceptance [--only 1,4,14]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "idla/analysis.hpp"
#include "idla/forest.hpp"
#include "idla/oracle.hpp"
#include "idla/stats.hpp"

using namespace idla;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* format, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

Outcome from_report(const ExperimentReport& r, const std::vector<std::string>& verdicts) {
  Outcome o{true, ""};
  for (const std::string& name : verdicts) {
    const Verdict& v = r.verdict(name);
    o.passed = o.passed && v.passed;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += (v.passed ? "ok " : "FAILED ") + v.name + (v.detail.empty() ? "" : " [" + v.detail + "]");
  }
  return o;
}

std::vector<std::size_t> shuffled(std::size_t size, std::uint64_t key) {
  std::vector<std::size_t> p(size);
  std::iota(p.begin(), p.end(), 0);
  KeyedSequence rng(key, Stream::permutation, 2);
  for (std::size_t i = size; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return p;
}

Outcome cardinality() {
  KeyedSequence rng(2024, Stream::permutation, 1);
  for (int trial = 0; trial < 50; ++trial) {
    GrowthSpec s;
    s.n = 1 + static_cast<std::uint32_t>(rng.below(8));
    s.M = static_cast<std::uint32_t>(rng.below(13));
    s.seed = rng.next();
    const Aggregate a = grow(s).aggregate;
    if (a.size() != (2 * s.M + 1) * s.n) return {false, "wrong cardinality at trial " + std::to_string(trial)};
    for (std::int64_t y = -static_cast<std::int64_t>(s.M); y <= static_cast<std::int64_t>(s.M); ++y) {
      if (!a.contains({0, y})) return {false, "axis site missing at trial " + std::to_string(trial)};
    }
  }
  return {true, "50 triples"};
}

Outcome pathwise_abelian() {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GrowthSpec s;
    s.n = 3;
    s.M = 6;
    s.seed = seed;
    const auto reference = grow(s).aggregate.sorted_sites();

    GrowthSpec clock = s;
    clock.variant = Variant::poisson_clock;
    for (std::int64_t y = -6; y <= 6; ++y) clock.forced_counts[y] = 3;
    if (grow(clock).aggregate.sorted_sites() != reference) return {false, "clock order differs"};

    for (std::uint64_t k = 0; k < 5; ++k) {
      GrowthSpec p = s;
      p.order = LevelOrder::explicit_permutation;
      p.permutation = shuffled(reference.size(), seed * 100 + k);
      if (grow(p).aggregate.sorted_sites() != reference) return {false, "a permutation differs"};
    }
  }
  return {true, "20 seeds x 7 orders"};
}

Outcome exact_abelian() {
  const ExperimentReport r = abelian_orders({0, 1}, 3);
  const double tv = r.estimate("max_tv").value;
  return {r.passed() && tv <= 1e-12, fmt("max TV %.3g over %.0f multisets", tv, r.estimate("multisets").value)};
}

Outcome oracle_vs_monte_carlo() {
  Outcome o{true, ""};
  const std::vector<std::vector<Site>> fixtures{{{0, 0}}, {{0, 0}, {1, 0}}};
  for (const auto& fixture : fixtures) {
    const ExitDistribution law = exact_exit_distribution(fixture, {0, 0});
    std::map<Site, std::size_t> hits;
    for (std::uint64_t seed = 0; seed < 100000; ++seed) {
      Cluster c({seed, WalkMode::site_stack});
      for (Site s : fixture) c.insert(s);
      ++hits[c.settle({0, 0}, {0, 0}).settled_site];
    }
    std::vector<std::size_t> observed;
    std::vector<double> expected;
    for (const auto& [site, p] : law.probabilities) {
      observed.push_back(hits[site]);
      expected.push_back(p);
      hits.erase(site);
    }
    const double p = hits.empty() ? stats::chi_square(observed, expected).p_value : 0.0;
    o.passed = o.passed && p > 1e-3;
    o.detail += fmt("chi2 p=%.3g on %.0f sites; ", p, static_cast<double>(fixture.size()));
  }
  // Domino by hand: g0 = 1 + g1/4 and g1 = g0/4 give g0 = 16/15, g1 = 4/15,
  // and each exit is reached with probability g/4.
  const double g0 = 16.0 / 15.0;
  const double g1 = 4.0 / 15.0;
  const std::vector<Site> domino{{0, 0}, {1, 0}};
  const auto exact = exact_exit_distribution_rational(domino, {0, 0});
  const bool rational_ok = exact.at({-1, 0}) == Rational(4, 15) && exact.at({0, 1}) == Rational(4, 15) &&
                           exact.at({2, 0}) == Rational(1, 15) && exact.at({1, -1}) == Rational(1, 15);
  const ExitDistribution d = exact_exit_distribution(domino, {0, 0});
  const bool float_ok = std::abs(d.probability({-1, 0}) - g0 / 4) < 1e-13 &&
                        std::abs(d.probability({2, 0}) - g1 / 4) < 1e-13;
  o.passed = o.passed && rational_ok && float_ok;
  o.detail += std::string("domino 4/15 and 1/15 ") + (rational_ok && float_ok ? "exact" : "MISMATCH");
  return o;
}

Outcome expected_width() {
  const auto r = width_per_level(Variant::deterministic, 30, 200, {0}, seed_range(1, 400));
  const Estimate& w = r.estimate("width[0]");
  Outcome o = from_report(r, {"width[0] within 5% of n"});
  o.detail = fmt("mean width %.4g +- %.2g, ", w.value, w.std_error) + o.detail;
  return o;
}

Outcome exit_count_identity() {
  const std::vector<std::int64_t> sweep{50, 100, 200};
  const auto a = exit_counts(0, 6, {{6, 0}}, sweep);
  const auto b = exit_counts(2, 8, {{8, 0}, {8, 1}, {-8, 0}}, sweep);
  const double va = a.estimate("exit_count[200]").value;
  const double vb = b.estimate("exit_count[200]").value;
  // Independent of the report verdicts: (2r + 1) #targets / 2.
  const bool ok = std::abs(va - 0.5) <= 0.02 * 0.5 && std::abs(vb - 7.5) <= 0.02 * 7.5;
  return {ok && a.passed() && b.passed(), fmt("%.6g vs 0.5, %.6g vs 7.5", va, vb)};
}

Outcome shape_fluctuations() {
  const std::uint32_t K = 10;
  AnalysisOptions options;
  options.walk = WalkMode::particle_stream;
  const auto r = shape_deviation_scan(Variant::deterministic, {50, 100, 200}, K,
                                      [=](std::uint32_t n) { return std::max(K * K, 2 * n); },
                                      seed_range(1, 200), options);
  return from_report(r, {"median_deviation[50] <= n/8", "median_deviation[100] <= n/8",
                         "median_deviation[200] <= n/8", "slope vs log n positive",
                         "median/n decreasing in n"});
}

Outcome far_particles() {
  const auto r = far_particle_monitor(Variant::deterministic, 2, {4, 8, 16}, 2.0, nullptr, seed_range(1, 500));
  Outcome o = from_report(r, {"touch frequency strictly decreasing in M", "touch frequency zero at largest M"});
  o.detail = fmt("touch frequencies %.4g, %.4g, %.4g; ", r.estimate("touch_frequency[4]").value,
                 r.estimate("touch_frequency[8]").value, r.estimate("touch_frequency[16]").value) +
             o.detail;
  return o;
}

Outcome forest_structure() {
  KeyedSequence rng(77, Stream::permutation, 3);
  for (int trial = 0; trial < 100; ++trial) {
    GrowthSpec s;
    s.variant = Variant::poisson_clock;
    s.n = 1 + static_cast<std::uint32_t>(rng.below(40));
    s.M = static_cast<std::uint32_t>(rng.below(201));
    s.seed = rng.next();
    const Aggregate a = grow(s).aggregate;
    const Forest f = build_forest(a);
    const auto problems = validate_forest(f, &a);
    if (!problems.empty()) return {false, "trial " + std::to_string(trial) + ": " + problems.front()};
    // Independent recount of the edge identity and of root placement.
    std::size_t roots = 0;
    for (const ForestVertex& v : f.vertices()) {
      if (!v.parent) {
        ++roots;
        if (v.site.x != 0 || v.site.y != v.source_level) return {false, "root off its source"};
      } else if (std::abs(v.parent->x - v.site.x) + std::abs(v.parent->y - v.site.y) != 1) {
        return {false, "non-lattice edge"};
      }
    }
    if (f.edge_count() != f.size() - roots) return {false, "edge count mismatch"};
  }
  return {true, "100 clock forests"};
}

Outcome forest_stabilization_check() {
  std::vector<std::uint32_t> grid;
  for (std::uint32_t M = 0; M <= 16; ++M) grid.push_back(M);
  for (std::uint32_t M = 20; M <= 64; M += 4) grid.push_back(M);
  grid.push_back(96);
  grid.push_back(128);
  AnalysisOptions options;
  options.walk = WalkMode::particle_stream;
  const auto r = forest_stabilization(1, 0, grid, 64, seed_range(1, 500), options);
  Outcome o{r.passed(), fmt("fraction within 64: %.4g, median M %.3g",
                            r.estimate("fraction_stabilized_within_limit").value,
                            r.estimate("median_stabilization_M").value)};
  return o;
}

Outcome empty_axis() {
  const auto seeds = seed_range(1, 1000);
  const double usual = empty_lines(Variant::poisson_usual, 1, 50, {-25, 25}, seeds).estimate("axis_empty_frequency").value;
  const double clock = empty_lines(Variant::poisson_clock, 1, 50, {-25, 25}, seeds).estimate("axis_empty_frequency").value;
  const double det = empty_lines(Variant::deterministic, 1, 50, {-25, 25}, seeds).estimate("axis_empty_frequency").value;
  return {usual > 0 && clock > 0 && det == 0,
          fmt("empty-axis frequency: usual %.4g, clock %.4g, deterministic %.4g", usual, clock, det)};
}

Outcome mixing() {
  const std::vector<Site> C{{0, 0}};
  const auto r = mixing_correlation(Variant::poisson_clock, 2, 200, C, C, {0, 1, 2, 4, 8, 16, 32, 64, 100},
                                    seed_range(1, 4000));
  const Estimate& rho = r.estimate("rho[100]");
  Outcome o = from_report(r, {"|rho| at largest k within 3 sigma of 0"});
  o.detail = fmt("rho[100] = %.3g +- %.3g; ", rho.value, rho.std_error) + o.detail;
  o.passed = o.passed && std::abs(rho.value) <= 3 * rho.std_error;
  return o;
}

Outcome height_drift_check() {
  const auto r = height_drift(Variant::poisson_usual, 5, 20, {0.0, 1.0, 2.0, 3.0}, 520, seed_range(1, 200));
  const Estimate& d = r.estimate("drift[3]");
  Outcome o = from_report(r, {"drift negative at 3 sigma at top zeta", "tau1 realized in >= 99% of seeds at top zeta"});
  o.detail = fmt("drift[3] = %.3g +- %.3g; ", d.value, d.std_error) + o.detail;
  o.passed = o.passed && d.value + 3 * d.std_error < 0 && r.estimate("tau1_realized[3]").value >= 0.99;
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "idla_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = IDLA_CLI_PATH;
  const std::string d = dir.string() + "/";
  const std::vector<std::string> commands{
      "grow --variant clock --n 4 --M 12 --seed 5 -o " + d + "a.tsv --svg " + d + "a.svg",
      "grow --variant det --n 3 --M 8 --seed 2 --walk stream -o " + d + "b.tsv",
      "forest --n 3 --M 10 --seed 7 -o " + d + "f.tsv --svg " + d + "f.svg --strip 2",
      "forest --n 2 --M 12 --seed 8 -o " + d + "g.tsv",
      "diff " + d + "f.tsv " + d + "g.tsv -o " + d + "diff.csv --svg " + d + "diff.svg",
      "diff --coupled --n 2 --M-small 6 --M-large 12 --seed 3 -o " + d + "coupled.csv",
      "render " + d + "a.tsv -o " + d + "render.svg",
      "experiment lines --seeds 30 --M 10 --out " + d + "lines",
      "experiment abelian --particles 2 --out " + d + "abelian",
  };
  const std::vector<std::string> outputs{"a.tsv", "a.svg", "b.tsv", "f.tsv", "f.svg", "g.tsv", "diff.csv",
                                         "diff.svg", "coupled.csv", "render.svg", "lines.csv",
                                         "lines.summary.txt", "abelian.csv", "abelian.summary.txt"};
  std::map<std::string, std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    for (const std::string& c : commands) {
      const std::string line = "\"" + cli + "\" " + c + " > /dev/null 2>&1";
      if (std::system(line.c_str()) != 0) return {false, "command failed: " + c};
    }
    for (const std::string& name : outputs) {
      const std::string bytes = slurp(dir / name);
      if (bytes.empty()) return {false, name + " is empty"};
      if (pass == 0) {
        first[name] = bytes;
        fs::remove(dir / name);
      } else if (first[name] != bytes) {
        return {false, name + " differs between runs"};
      }
    }
  }
  fs::remove_all(dir);
  return {true, std::to_string(commands.size()) + " commands, " + std::to_string(outputs.size()) +
                    " files byte-identical"};
}

std::set<int> parse_only(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
    } else {
      std::fprintf(stderr, "usage: %s [--only 1,2,...]\n", argv[0]);
      std::exit(2);
    }
  }
  return only;
}

}  // namespace

int main(int argc, char** argv) {
  const std::set<int> only = parse_only(argc, argv);
  const std::vector<Criterion> criteria{
      {1, "cardinality identity and axis containment", 10, cardinality},
      {2, "pathwise Abelian property", 30, pathwise_abelian},
      {3, "exact distributional Abelian check", 5, exact_abelian},
      {4, "oracle vs Monte Carlo settle laws", 60, oracle_vs_monte_carlo},
      {5, "expected width", 600, expected_width},
      {6, "exit-count identity", 300, exit_count_identity},
      {7, "shape fluctuations", 1800, shape_fluctuations},
      {8, "far-particle stabilization", 600, far_particles},
      {9, "forest structure", 600, forest_structure},
      {10, "forest stabilization", 900, forest_stabilization_check},
      {11, "empty-axis positivity", 300, empty_axis},
      {12, "mixing surrogate", 1800, mixing},
      {13, "height drift", 900, height_drift_check},
      {14, "CLI reproducibility", 60, reproducibility},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.limit_seconds;
    const bool passed = o.passed && in_time;
    if (!passed) ++failures;
    std::printf("%s %2d %s (%.1f s, limit %.0f s%s) %s\n", passed ? "PASS" : "FAIL", c.id, c.title.c_str(),
                seconds, c.limit_seconds, in_time ? "" : ", OVER TIME", o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
