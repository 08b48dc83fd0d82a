#include "idla/forest.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "idla/parallel.hpp"

namespace idla {

Forest::Forest(std::vector<ForestVertex> vertices) : vertices_(std::move(vertices)) {
  index_.reserve(vertices_.size());
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!index_.emplace(vertices_[i].site, i).second) {
      throw ConfigError("forest has a repeated vertex");
    }
  }
}

std::size_t Forest::edge_count() const {
  return static_cast<std::size_t>(std::count_if(vertices_.begin(), vertices_.end(),
                                                [](const ForestVertex& v) { return v.parent; }));
}

const ForestVertex* Forest::find(Site s) const {
  auto it = index_.find(s);
  return it == index_.end() ? nullptr : &vertices_[it->second];
}

std::optional<Site> Forest::parent(Site s) const {
  const ForestVertex* v = find(s);
  if (!v) throw std::out_of_range("site is not a forest vertex");
  return v->parent;
}

Forest build_forest(const Aggregate& run) {
  std::vector<ForestVertex> vertices;
  vertices.reserve(run.size());
  const auto& sites = run.sites();
  const auto& prov = run.provenance();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const Provenance& p = prov[i];
    if (p.birth_index != i + 1) throw ConfigError("aggregate provenance is missing or inconsistent");
    if (p.path_length > 0 && !p.predecessor) {
      throw ConfigError("aggregate provenance lacks predecessor sites");
    }
    vertices.push_back({sites[i], p.predecessor, p.birth_index, p.source_level, p.birth_time});
  }
  return Forest(std::move(vertices));
}

Forest build_radial_tree(const Aggregate& run) {
  if (run.params().variant != Variant::classical) {
    throw ConfigError("build_radial_tree requires a classical-origin run");
  }
  return build_forest(run);
}

std::vector<std::string> validate_forest(const Forest& f, const Aggregate* run) {
  std::vector<std::string> problems;
  auto report = [&](auto&&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    problems.push_back(os.str());
  };

  if (run) {
    if (run->size() != f.size()) report("forest has ", f.size(), " vertices, aggregate ", run->size());
    for (Site s : run->sites()) {
      if (!f.contains(s)) report("aggregate site ", s, " is not a vertex");
    }
  }

  for (const ForestVertex& v : f.vertices()) {
    if (!v.parent) {
      if (v.site.x != 0) report("root ", v.site, " is off the source axis");
      continue;
    }
    if (!adjacent(*v.parent, v.site)) report("edge ", *v.parent, "->", v.site, " is not a lattice edge");
    const ForestVertex* p = f.find(*v.parent);
    if (!p) {
      report("parent ", *v.parent, " of ", v.site, " is not a vertex");
    } else if (p->birth_index >= v.birth_index) {
      report("parent ", *v.parent, " of ", v.site, " is younger than its child");
    }
  }

  // Parents are strictly older, so parent chains terminate; check explicitly
  // in case birth indices were not consistent.
  std::unordered_map<Site, int, SiteHash> state;  // 1 = on stack, 2 = reaches a root
  for (const ForestVertex& v : f.vertices()) {
    std::vector<Site> chain;
    Site cur = v.site;
    bool cycle = false;
    while (true) {
      auto it = state.find(cur);
      if (it != state.end()) {
        cycle = it->second == 1;
        break;
      }
      state[cur] = 1;
      chain.push_back(cur);
      const ForestVertex* w = f.find(cur);
      if (!w || !w->parent) break;
      cur = *w->parent;
    }
    if (cycle) report("cycle through ", cur);
    for (Site s : chain) state[s] = 2;
  }
  return problems;
}

BranchDeviation branch_deviation(const Forest& f, Site target) {
  const ForestVertex* v = f.find(target);
  if (!v) throw std::out_of_range("branch target is not a forest vertex");
  BranchDeviation out;
  std::vector<Site>& path = out.branch.sites;
  path.push_back(target);
  while (v->parent) {
    path.push_back(*v->parent);
    v = f.find(*v->parent);
    if (!v) throw std::logic_error("forest parent is not a vertex");
    if (path.size() > f.size()) throw std::logic_error("forest contains a cycle");
  }
  std::reverse(path.begin(), path.end());
  out.max_y = out.min_y = target.y;
  for (Site s : path) {
    out.max_y = std::max(out.max_y, s.y);
    out.min_y = std::min(out.min_y, s.y);
  }
  return out;
}

ForestDiff diff_forests(const Forest& a, const Forest& b, const Region& region) {
  ForestDiff diff;
  for (const ForestVertex& v : a.vertices()) {
    if (!region.contains(v.site)) continue;
    const ForestVertex* w = b.find(v.site);
    if (!w) {
      diff.vertex_discrepancies.push_back(v.site);
    } else if (w->parent != v.parent) {
      diff.edge_discrepancies.push_back(v.site);
    }
  }
  for (const ForestVertex& w : b.vertices()) {
    if (region.contains(w.site) && !a.contains(w.site)) diff.vertex_discrepancies.push_back(w.site);
  }
  std::sort(diff.vertex_discrepancies.begin(), diff.vertex_discrepancies.end());
  std::sort(diff.edge_discrepancies.begin(), diff.edge_discrepancies.end());
  return diff;
}

namespace {

using Restriction = std::vector<std::pair<Site, std::optional<Site>>>;

Restriction restrict_to_strip(const Forest& f, std::uint32_t K) {
  Restriction out;
  const Region strip = Region::strip(K);
  for (const ForestVertex& v : f.vertices()) {
    if (strip.contains(v.site)) out.emplace_back(v.site, v.parent);
  }
  std::sort(out.begin(), out.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });
  return out;
}

}  // namespace

std::pair<std::uint32_t, bool> stabilization_radius_one(std::uint32_t n, std::uint32_t K,
                                                        const std::vector<std::uint32_t>& M_grid,
                                                        std::uint64_t seed, WalkMode walk) {
  if (M_grid.empty()) throw ConfigError("M grid is empty");
  std::vector<Restriction> restrictions;
  restrictions.reserve(M_grid.size());
  for (std::uint32_t M : M_grid) {
    GrowthSpec spec;
    spec.n = n;
    spec.M = M;
    spec.variant = Variant::poisson_clock;
    spec.seed = seed;
    spec.walk = walk;
    restrictions.push_back(restrict_to_strip(build_forest(grow(spec).aggregate), K));
  }
  std::size_t first_stable = restrictions.size() - 1;
  while (first_stable > 0 && restrictions[first_stable - 1] == restrictions.back()) --first_stable;
  const bool conclusive = M_grid.size() > 1 && first_stable + 1 < M_grid.size();
  return {M_grid[first_stable], conclusive};
}

StabilizationScan stabilization_radius(std::uint32_t n, std::uint32_t K,
                                       const std::vector<std::uint32_t>& M_grid,
                                       const std::vector<std::uint64_t>& seeds, WalkMode walk) {
  if (!std::is_sorted(M_grid.begin(), M_grid.end()) ||
      std::adjacent_find(M_grid.begin(), M_grid.end()) != M_grid.end()) {
    throw ConfigError("M grid must be strictly increasing");
  }
  StabilizationScan scan;
  scan.grid = M_grid;
  scan.seeds = seeds;
  auto results = run_replicas(std::span<const std::uint64_t>(seeds), [&](std::uint64_t seed) {
    return stabilization_radius_one(n, K, M_grid, seed, walk);
  });
  for (const auto& [at, ok] : results) {
    scan.stabilized_at.push_back(at);
    scan.conclusive.push_back(ok);
  }
  return scan;
}

double StabilizationScan::fraction_stabilized_within(std::uint32_t M_limit) const {
  if (seeds.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (conclusive[i] && stabilized_at[i] <= M_limit) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(seeds.size());
}

std::optional<double> StabilizationScan::median_stabilized_at() const {
  if (stabilized_at.empty()) return std::nullopt;
  std::vector<double> v(stabilized_at.begin(), stabilized_at.end());
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace idla
