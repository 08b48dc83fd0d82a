// idla: grow aggregates and forests, diff forests, run experiments, render SVG.
//
// Exit codes: 0 success, 2 usage or parse error, 3 numerical or budget abort.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "idla/analysis.hpp"
#include "idla/forest.hpp"
#include "idla/growth.hpp"
#include "idla/io.hpp"
#include "idla/oracle.hpp"
#include "idla/walk.hpp"

namespace {

using namespace idla;

constexpr int kExitUsage = 2;
constexpr int kExitAbort = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- argument helpers -----------------------------------------------------

/// Sites written as "(x,y)" separated by ';', ',' or spaces.
std::vector<Site> parse_sites(const std::string& text) {
  static const std::regex site(R"(\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\))");
  std::vector<Site> out;
  std::string rest;
  auto begin = std::sregex_iterator(text.begin(), text.end(), site);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    rest += text.substr(last, static_cast<std::size_t>(it->position()) - last);
    last = static_cast<std::size_t>(it->position() + it->length());
    out.push_back({std::stoll((*it)[1]), std::stoll((*it)[2])});
  }
  rest += text.substr(last);
  if (rest.find_first_not_of(" ;,") != std::string::npos || out.empty()) {
    throw UsageError("cannot parse site list '" + text + "' (expected (x,y);(x,y)...)");
  }
  return out;
}

Variant variant_arg(const std::string& s) {
  if (auto v = parse_variant(s)) return *v;
  throw UsageError("unknown variant '" + s + "' (det, poisson, clock, classical)");
}

WalkMode walk_arg(const std::string& s) {
  if (auto w = parse_walk_mode(s)) return *w;
  throw UsageError("unknown walk mode '" + s + "' (stack, stream)");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open " + path + " for writing");
  out << content;
  if (!out.flush()) throw UsageError("failed writing " + path);
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

/// Config files hold key=value lines that fill options not given as flags.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;
  std::ifstream in(*path);
  if (!in) throw UsageError("cannot open config file " + *path);
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> extra;
  std::string line;
  while (std::getline(in, line)) {
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line without '=': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError("config line without key: " + line);
    if (given(key)) continue;
    if (value == "true") {
      extra.push_back("--" + key);
    } else if (value != "false") {
      extra.push_back("--" + key);
      extra.push_back(value);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

// --- grow / forest --------------------------------------------------------

struct GrowArgs {
  std::string variant = "det";
  std::uint32_t n = 1;
  std::uint32_t M = 0;
  std::uint64_t seed = 1;
  std::string walk = "stack";
  std::uint64_t step_budget = kDefaultStepBudget;
  std::string output;
  std::string svg;
  std::optional<std::int64_t> strip;
  std::optional<std::int64_t> rect;
};

void add_grow_options(CLI::App* sub, GrowArgs& a, const char* default_variant) {
  a.variant = default_variant;
  sub->add_option("--variant", a.variant, "det | poisson | clock | classical")->capture_default_str();
  sub->add_option("--n", a.n, "particles per level (classical: total particles)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--M", a.M, "source levels -M..M")->capture_default_str();
  sub->add_option("--seed", a.seed, "master seed")->capture_default_str();
  sub->add_option("--walk", a.walk, "stack | stream")->capture_default_str();
  sub->add_option("--step-budget", a.step_budget, "abort a walk after this many steps")->capture_default_str();
  sub->add_option("-o,--output", a.output, "output file")->required();
  sub->add_option("--svg", a.svg, "also write an SVG rendering");
  sub->add_option("--strip", a.strip, "draw guides at y = +-K in the SVG");
  sub->add_option("--rect", a.rect, "draw guides at x = +-r in the SVG");
}

GrowthSpec spec_from(const GrowArgs& a) {
  GrowthSpec spec;
  spec.n = a.n;
  spec.M = a.M;
  spec.variant = variant_arg(a.variant);
  spec.seed = a.seed;
  spec.walk = walk_arg(a.walk);
  spec.step_budget = a.step_budget;
  return spec;
}

Aggregate grow_from(const GrowArgs& a) {
  const GrowthSpec spec = spec_from(a);
  if (spec.variant == Variant::classical) {
    // The classical cluster is always grown through the engine so the budget applies.
    GrowthSpec c = spec;
    c.M = 0;
    return grow(c).aggregate;
  }
  return grow(spec).aggregate;
}

io::Parameters growth_parameters(const GrowArgs& a, const Aggregate& agg) {
  io::Parameters p = io::describe(agg.params());
  p.emplace_back("step_budget", std::to_string(a.step_budget));
  return p;
}

io::SvgOptions svg_options(const std::optional<std::int64_t>& strip, const std::optional<std::int64_t>& rect,
                           std::string title) {
  io::SvgOptions o;
  o.strip = strip;
  o.rectangle = rect;
  o.title = std::move(title);
  return o;
}

int cmd_grow(const GrowArgs& a) {
  const Aggregate agg = grow_from(a);
  const io::Parameters params = growth_parameters(a, agg);
  write_file(a.output, render([&](std::ostream& os) { io::write_aggregate(os, agg, params); }));
  if (!a.svg.empty()) {
    write_file(a.svg, render([&](std::ostream& os) {
                 io::render_aggregate_svg(os, agg.sites(), svg_options(a.strip, a.rect, "aggregate"));
               }));
  }
  std::cout << agg.size() << " sites written to " << a.output << '\n';
  return 0;
}

int cmd_forest(const GrowArgs& a) {
  const Variant v = variant_arg(a.variant);
  if (v != Variant::poisson_clock && v != Variant::classical) {
    throw UsageError("forest needs --variant clock or --variant classical");
  }
  const Aggregate agg = grow_from(a);
  const Forest f = v == Variant::classical ? build_radial_tree(agg) : build_forest(agg);
  const io::Parameters params = growth_parameters(a, agg);
  write_file(a.output, render([&](std::ostream& os) { io::write_forest(os, f, params, a.seed); }));
  if (!a.svg.empty()) {
    write_file(a.svg, render([&](std::ostream& os) {
                 io::render_forest_svg(os, f, svg_options(a.strip, a.rect, "forest"));
               }));
  }
  std::cout << f.size() << " vertices, " << f.edge_count() << " edges, " << f.root_count()
            << " roots written to " << a.output << '\n';
  return 0;
}

// --- diff -----------------------------------------------------------------

struct DiffArgs {
  std::vector<std::string> files;
  std::optional<std::int64_t> strip;
  std::optional<std::int64_t> rect;
  std::string output;
  std::string svg;
  bool coupled = false;
  std::uint32_t n = 1;
  std::uint32_t M_small = 20;
  std::uint32_t M_large = 50;
  std::uint64_t seed = 1;
  std::string walk = "stack";
};

Region region_from(const std::optional<std::int64_t>& strip, const std::optional<std::int64_t>& rect) {
  Region r;
  if (strip) {
    r.y_lo = -*strip;
    r.y_hi = *strip;
  }
  if (rect) {
    r.x_lo = -*rect;
    r.x_hi = *rect;
  }
  return r;
}

int cmd_diff(const DiffArgs& a) {
  const Region region = region_from(a.strip, a.rect);
  Forest first;
  Forest second;
  std::vector<ChainOfChanges> chains;
  io::Parameters params;
  if (a.coupled) {
    if (!a.files.empty()) throw UsageError("--coupled grows its own forests; do not pass files");
    if (a.M_small >= a.M_large) throw UsageError("--M-small must be below --M-large");
    GrowthSpec spec;
    spec.n = a.n;
    spec.variant = Variant::poisson_clock;
    spec.seed = a.seed;
    spec.walk = walk_arg(a.walk);
    spec.record_paths = true;
    const CoupledPair pair = grow_coupled_pair(spec, a.M_small, a.M_large);
    first = build_forest(pair.small.aggregate);
    second = build_forest(pair.large.aggregate);
    chains = pair.log.chains;
    params = {{"mode", "coupled"},
              {"n", std::to_string(a.n)},
              {"M_small", std::to_string(a.M_small)},
              {"M_large", std::to_string(a.M_large)},
              {"seed", std::to_string(a.seed)},
              {"walk", a.walk}};
  } else {
    if (a.files.size() != 2) throw UsageError("diff needs two forest files (or --coupled)");
    first = io::read_forest_file(a.files[0]).forest;
    second = io::read_forest_file(a.files[1]).forest;
    params = {{"mode", "files"}, {"first", a.files[0]}, {"second", a.files[1]}};
  }
  params.emplace_back("strip", a.strip ? std::to_string(*a.strip) : "");
  params.emplace_back("rect", a.rect ? std::to_string(*a.rect) : "");

  ForestDiff diff = diff_forests(first, second, region);
  for (const ChainOfChanges& c : chains) {
    if (std::any_of(c.relays.begin(), c.relays.end(), [&](Site s) { return region.contains(s); })) {
      diff.chains.push_back(c);
    }
  }
  std::cout << diff.count() << " discrepancies (" << diff.vertex_discrepancies.size() << " vertex, "
            << diff.edge_discrepancies.size() << " edge)";
  if (a.coupled) std::cout << ", " << diff.chains.size() << " chains of changes reaching the region";
  std::cout << '\n';
  if (!a.output.empty()) {
    write_file(a.output, render([&](std::ostream& os) { io::write_diff_csv(os, diff, params); }));
  }
  if (!a.svg.empty()) {
    io::SvgOptions o = svg_options(a.strip, a.rect, "forest discrepancies");
    o.highlight_primary = diff.vertex_discrepancies;
    o.highlight_secondary = diff.edge_discrepancies;
    write_file(a.svg, render([&](std::ostream& os) { io::render_forest_svg(os, second, o); }));
  }
  return 0;
}

// --- render ---------------------------------------------------------------

struct RenderArgs {
  std::string input;
  std::string output;
  std::optional<std::int64_t> strip;
  std::optional<std::int64_t> rect;
  double cell = 10.0;
};

int cmd_render(const RenderArgs& a) {
  std::ifstream in(a.input);
  if (!in) throw io::ParseError("cannot open " + a.input);
  std::string tag;
  std::getline(in, tag);
  in.seekg(0);
  io::SvgOptions o = svg_options(a.strip, a.rect, a.input);
  o.cell = a.cell;
  std::string svg;
  if (tag == std::string("# ") + io::kForestTag) {
    const io::ForestFile f = io::read_forest(in);
    svg = render([&](std::ostream& os) { io::render_forest_svg(os, f.forest, o); });
  } else if (tag == std::string("# ") + io::kAggregateTag) {
    const io::AggregateFile f = io::read_aggregate(in);
    std::vector<Site> sites;
    for (const auto& row : f.rows) sites.push_back(row.site);
    svg = render([&](std::ostream& os) { io::render_aggregate_svg(os, sites, o); });
  } else {
    throw io::ParseError("unrecognized file type in " + a.input);
  }
  write_file(a.output, svg);
  return 0;
}

// --- experiment -----------------------------------------------------------

struct ExperimentArgs {
  std::string name;
  std::optional<std::string> variant;
  std::optional<std::uint32_t> n;
  std::optional<std::uint32_t> M;
  std::optional<std::size_t> seeds;
  std::uint64_t first_seed = 1;
  int jobs = 0;
  bool serial = false;
  std::string walk;
  std::string out;
  // width
  std::vector<std::int64_t> rows;
  // shape
  std::vector<std::uint32_t> n_list;
  std::optional<std::uint32_t> K;
  std::optional<std::uint32_t> M_factor;
  std::optional<std::uint32_t> M_per_n;
  // far
  std::vector<std::uint32_t> M_grid;
  double alpha = 2.0;
  std::optional<std::uint32_t> far_levels;
  // height
  std::vector<double> zeta;
  std::optional<std::int64_t> t_max;
  // lines
  std::optional<std::int64_t> lo;
  std::optional<std::int64_t> hi;
  // mixing / symmetry
  std::string C1;
  std::string C2;
  std::vector<std::int64_t> k_grid;
  std::optional<std::int64_t> k;
  std::string pattern;
  // stabilize-forest
  std::vector<std::uint32_t> grid;
  std::uint32_t limit = 64;
  // exit-counts
  std::uint32_t r = 0;
  std::uint32_t rp = 6;
  std::string tau = "(6,0)";
  std::vector<std::int64_t> L = {50, 100, 200};
  // abelian
  std::uint32_t particles = 3;
  std::string orders = "all";
  std::vector<std::int64_t> levels = {0, 1};
  // branch
  std::vector<std::uint32_t> distances;
};

const std::vector<std::string> kExperiments = {"width",   "shape",    "far",      "height",
                                               "lines",   "mixing",   "symmetry", "stabilize-forest",
                                               "exit-counts", "abelian", "branch", "spanning"};

void add_experiment_options(CLI::App* sub, ExperimentArgs& a) {
  sub->add_option("name", a.name, "experiment name")->required()->check(CLI::IsMember(kExperiments));
  sub->add_option("--variant", a.variant, "det | poisson | clock | classical");
  sub->add_option("--n", a.n, "particles per level")->check(CLI::PositiveNumber);
  sub->add_option("--M", a.M, "source levels -M..M");
  sub->add_option("--seeds", a.seeds, "number of seeds")->check(CLI::PositiveNumber);
  sub->add_option("--first-seed", a.first_seed, "first seed of the range")->capture_default_str();
  sub->add_option("--jobs", a.jobs, "worker threads (0 = all hardware threads)")->capture_default_str();
  sub->add_flag("--serial", a.serial, "use the serial reference runner");
  sub->add_option("--walk", a.walk, "stack | stream");
  sub->add_option("--out", a.out, "write <out>.csv and <out>.summary.txt");
  sub->add_option("--rows", a.rows, "rows for width")->delimiter(',');
  sub->add_option("--n-list", a.n_list, "n values for shape/spanning")->delimiter(',');
  sub->add_option("--K", a.K, "strip half-height");
  sub->add_option("--M-factor", a.M_factor, "shape: M >= factor * K^2 (default 1)");
  sub->add_option("--M-per-n", a.M_per_n, "shape: M >= this * n (default 2)");
  sub->add_option("--M-grid", a.M_grid, "far: strip half-heights")->delimiter(',');
  sub->add_option("--alpha", a.alpha, "far: exponent of the far threshold")->capture_default_str();
  sub->add_option("--far-levels", a.far_levels, "far: levels beyond the threshold (default M)");
  sub->add_option("--zeta", a.zeta, "height: zeta grid")->delimiter(',');
  sub->add_option("--t-max", a.t_max, "height: last emission level");
  sub->add_option("--lo", a.lo, "lines: lowest window row");
  sub->add_option("--hi", a.hi, "lines: highest window row");
  sub->add_option("--C1", a.C1, "mixing: site set, e.g. (0,0);(1,0)");
  sub->add_option("--C2", a.C2, "mixing: site set");
  sub->add_option("--k-grid", a.k_grid, "mixing: vertical shifts")->delimiter(',');
  sub->add_option("--k", a.k, "symmetry: shift / reflection parameter");
  sub->add_option("--pattern", a.pattern, "symmetry/spanning: site set");
  sub->add_option("--grid", a.grid, "stabilize-forest: M grid")->delimiter(',');
  sub->add_option("--limit", a.limit, "stabilize-forest: M limit")->capture_default_str();
  sub->add_option("--r", a.r, "exit-counts: half-width of the summed block")->capture_default_str();
  sub->add_option("--rp", a.rp, "exit-counts: absorbing lines |x| = rp")->capture_default_str();
  sub->add_option("--tau", a.tau, "exit-counts: target sites on |x| = rp")->capture_default_str();
  sub->add_option("--L", a.L, "exit-counts: L sweep")->delimiter(',')->capture_default_str();
  sub->add_option("--particles", a.particles, "abelian: maximal particle count")->capture_default_str();
  sub->add_option("--orders", a.orders, "abelian: 'all'")->capture_default_str();
  sub->add_option("--levels", a.levels, "abelian: emission levels")->delimiter(',')->capture_default_str();
  sub->add_option("--distances", a.distances, "branch: target distances d")->delimiter(',');
}

template <class T>
T pick(const std::optional<T>& v, T fallback) {
  return v ? *v : fallback;
}

template <class T>
std::vector<T> pick(const std::vector<T>& v, std::vector<T> fallback) {
  return v.empty() ? fallback : v;
}

ExperimentReport run_experiment(const ExperimentArgs& a) {
  AnalysisOptions options;
  options.exec.jobs = a.jobs;
  options.exec.serial = a.serial;
  if (!a.walk.empty()) options.walk = walk_arg(a.walk);
  auto seeds = [&](std::size_t fallback) { return seed_range(a.first_seed, pick(a.seeds, fallback)); };
  auto variant = [&](const char* fallback) { return variant_arg(a.variant.value_or(fallback)); };
  const std::string& e = a.name;

  if (e == "width") {
    return width_per_level(variant("det"), pick(a.n, 30u), pick(a.M, 200u), pick(a.rows, {0}), seeds(400),
                           options);
  }
  if (e == "shape") {
    const std::uint32_t K = pick(a.K, 10u);
    const std::uint32_t factor = pick(a.M_factor, 1u);
    const std::uint32_t per_n = pick(a.M_per_n, 2u);
    if (a.walk.empty()) options.walk = WalkMode::particle_stream;
    return shape_deviation_scan(variant("det"), pick(a.n_list, {50, 100, 200}), K,
                                [=](std::uint32_t n) { return std::max(factor * K * K, per_n * n); },
                                seeds(200), options);
  }
  if (e == "far") {
    std::function<std::uint32_t(std::uint32_t)> levels;
    if (a.far_levels) {
      const std::uint32_t fixed = *a.far_levels;
      levels = [=](std::uint32_t) { return fixed; };
    }
    return far_particle_monitor(variant("det"), pick(a.n, 2u), pick(a.M_grid, {4, 8, 16}), a.alpha, levels,
                                seeds(500), options);
  }
  if (e == "height") {
    const std::uint32_t M = pick(a.M, 20u);
    return height_drift(variant("poisson"), pick(a.n, 5u), M, pick(a.zeta, {0.0, 1.0, 2.0, 3.0}),
                        pick(a.t_max, static_cast<std::int64_t>(M) + 500), seeds(200), options);
  }
  if (e == "lines") {
    const std::uint32_t M = pick(a.M, 50u);
    const auto half = static_cast<std::int64_t>(M / 2);
    return empty_lines(variant("poisson"), pick(a.n, 1u), M, {pick(a.lo, -half), pick(a.hi, half)}, seeds(1000),
                       options);
  }
  if (e == "mixing") {
    const std::uint32_t M = pick(a.M, 200u);
    const std::vector<Site> C1 = a.C1.empty() ? std::vector<Site>{{0, 0}} : parse_sites(a.C1);
    const std::vector<Site> C2 = a.C2.empty() ? C1 : parse_sites(a.C2);
    std::vector<std::int64_t> ks = a.k_grid;
    if (ks.empty()) {
      std::int64_t diam = 0;
      for (Site p : C2) {
        for (Site q : C2) diam = std::max(diam, std::abs(p.x - q.x) + std::abs(p.y - q.y));
      }
      const std::int64_t k_max = static_cast<std::int64_t>(M / 2) - diam;
      for (std::int64_t k : {0, 1, 2, 4, 8, 16, 32, 64}) {
        if (k < k_max) ks.push_back(k);
      }
      ks.push_back(k_max);
    }
    return mixing_correlation(variant("clock"), pick(a.n, 2u), M, C1, C2, ks, seeds(4000), options);
  }
  if (e == "symmetry") {
    const std::vector<Site> pattern = a.pattern.empty() ? std::vector<Site>{{5, 0}} : parse_sites(a.pattern);
    return symmetry_checks(variant("clock"), pick(a.n, 3u), pick(a.M, 120u), pattern, pick(a.k, std::int64_t{4}),
                           seeds(2000), options);
  }
  if (e == "stabilize-forest") {
    std::vector<std::uint32_t> grid = a.grid;
    if (grid.empty()) {
      for (std::uint32_t M = 0; M <= 16; ++M) grid.push_back(M);
      for (std::uint32_t M = 20; M <= 64; M += 4) grid.push_back(M);
      grid.push_back(96);
      grid.push_back(128);
    }
    if (a.walk.empty()) options.walk = WalkMode::particle_stream;
    return forest_stabilization(pick(a.n, 1u), pick(a.K, 0u), grid, a.limit, seeds(500), options);
  }
  if (e == "exit-counts") {
    return exit_counts(a.r, a.rp, parse_sites(a.tau), a.L);
  }
  if (e == "abelian") {
    if (a.orders != "all") throw UsageError("--orders supports only 'all'");
    return abelian_orders(a.levels, a.particles);
  }
  if (e == "branch") {
    return branch_deviation_scan(
        pick(a.distances, {25, 50, 100}), [](std::uint32_t d) { return 2 * d; },
        [](std::uint32_t d) { return 2 * d; }, seeds(300), options);
  }
  if (e == "spanning") {
    const std::vector<Site> pattern = a.pattern.empty() ? std::vector<Site>{{-10, 0}, {10, 0}, {0, 10}, {0, -10}}
                                                        : parse_sites(a.pattern);
    return spanning_probability(pick(a.n_list, {50, 100, 200}), pick(a.M, 400u), pattern, seeds(200), options);
  }
  throw UsageError("unknown experiment '" + e + "'");
}

int cmd_experiment(const ExperimentArgs& a) {
  ExperimentReport report = run_experiment(a);
  report.parameters.emplace_back("first_seed", std::to_string(a.first_seed));
  const std::string summary = render([&](std::ostream& os) { io::write_report_summary(os, report); });
  std::cout << summary;
  if (report.id == "abelian") {
    char line[128];
    std::snprintf(line, sizeof line, "max TV distance across orders: %.3g, %s\n", report.estimate("max_tv").value,
                  report.passed() ? "PASS" : "FAIL");
    std::cout << line;
  }
  if (!a.out.empty()) {
    write_file(a.out + ".csv", render([&](std::ostream& os) { io::write_report_csv(os, report); }));
    write_file(a.out + ".summary.txt", summary);
  }
  std::fprintf(stderr, "wall time %.3f s\n", report.wall_seconds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Internal DLA with line sources: growth, forests, experiments", "idla"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expand all help");
  app.add_option("--config", "key=value file; flags given on the command line take precedence");

  GrowArgs grow_args;
  auto* grow_cmd = app.add_subcommand("grow", "grow an aggregate and write it");
  add_grow_options(grow_cmd, grow_args, "det");

  GrowArgs forest_args;
  auto* forest_cmd = app.add_subcommand("forest", "grow a clock-variant forest or a classical tree");
  add_grow_options(forest_cmd, forest_args, "clock");

  DiffArgs diff_args;
  auto* diff_cmd = app.add_subcommand("diff", "compare two forests inside a region");
  diff_cmd->add_option("files", diff_args.files, "two forest files");
  diff_cmd->add_option("--strip", diff_args.strip, "restrict to |y| <= K");
  diff_cmd->add_option("--rect", diff_args.rect, "restrict to |x| <= r");
  diff_cmd->add_option("-o,--output", diff_args.output, "write the discrepancies as CSV");
  diff_cmd->add_option("--svg", diff_args.svg, "render discrepancies over the second forest");
  diff_cmd->add_flag("--coupled", diff_args.coupled, "grow a coupled pair of clock forests instead of reading files");
  diff_cmd->add_option("--n", diff_args.n, "coupled: particles per unit time")->check(CLI::PositiveNumber);
  diff_cmd->add_option("--M-small", diff_args.M_small, "coupled: smaller M")->capture_default_str();
  diff_cmd->add_option("--M-large", diff_args.M_large, "coupled: larger M")->capture_default_str();
  diff_cmd->add_option("--seed", diff_args.seed, "coupled: master seed")->capture_default_str();
  diff_cmd->add_option("--walk", diff_args.walk, "coupled: stack | stream")->capture_default_str();

  RenderArgs render_args;
  auto* render_cmd = app.add_subcommand("render", "render an aggregate or forest file as SVG");
  render_cmd->add_option("input", render_args.input, "aggregate or forest file")->required();
  render_cmd->add_option("-o,--output", render_args.output, "SVG file")->required();
  render_cmd->add_option("--strip", render_args.strip, "guides at y = +-K");
  render_cmd->add_option("--rect", render_args.rect, "guides at x = +-r");
  render_cmd->add_option("--cell", render_args.cell, "cell size in pixels")->capture_default_str();

  ExperimentArgs exp_args;
  auto* exp_cmd = app.add_subcommand("experiment", "run a replica experiment and report verdicts");
  add_experiment_options(exp_cmd, exp_args);

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*grow_cmd) return cmd_grow(grow_args);
    if (*forest_cmd) return cmd_forest(forest_args);
    if (*diff_cmd) return cmd_diff(diff_args);
    if (*render_cmd) return cmd_render(render_args);
    if (*exp_cmd) return cmd_experiment(exp_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const io::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return kExitUsage;
  } catch (const StepBudgetExceeded& e) {
    std::cerr << "aborted: " << e.what() << '\n';
    return kExitAbort;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitAbort;
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return kExitAbort;
  }
  return kExitUsage;
}
