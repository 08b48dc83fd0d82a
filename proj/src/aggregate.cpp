#include "idla/aggregate.hpp"

#include <algorithm>
#include <sstream>

namespace idla {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::deterministic: return "deterministic";
    case Variant::poisson_usual: return "poisson-usual";
    case Variant::poisson_clock: return "poisson-clock";
    case Variant::classical: return "classical-origin";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view s) {
  if (s == "det" || s == "deterministic") return Variant::deterministic;
  if (s == "poisson" || s == "poisson-usual" || s == "usual") return Variant::poisson_usual;
  if (s == "clock" || s == "poisson-clock") return Variant::poisson_clock;
  if (s == "classical" || s == "classical-origin") return Variant::classical;
  return std::nullopt;
}

std::string_view to_string(WalkMode m) {
  return m == WalkMode::site_stack ? "stack" : "stream";
}

std::optional<WalkMode> parse_walk_mode(std::string_view s) {
  if (s == "stack") return WalkMode::site_stack;
  if (s == "stream") return WalkMode::particle_stream;
  return std::nullopt;
}

const Provenance& Aggregate::provenance_of(Site s) const {
  auto it = index_.find(s);
  if (it == index_.end()) throw std::out_of_range("site not in aggregate");
  return provenance_[it->second];
}

std::optional<std::size_t> Aggregate::index_of(Site s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Aggregate::add(Site s, Provenance p) {
  if (!index_.emplace(s, sites_.size()).second) {
    throw std::logic_error("Aggregate::add: repeated site");
  }
  sites_.push_back(s);
  provenance_.push_back(std::move(p));
}

std::size_t Aggregate::row_count(std::int64_t level) const {
  return static_cast<std::size_t>(
      std::count_if(sites_.begin(), sites_.end(), [&](Site s) { return s.y == level; }));
}

std::vector<Site> Aggregate::sorted_sites() const {
  std::vector<Site> out = sites_;
  std::sort(out.begin(), out.end());
  return out;
}

Aggregate Aggregate::prefix(std::size_t count) const {
  Aggregate out(params_);
  count = std::min(count, sites_.size());
  for (std::size_t i = 0; i < count; ++i) out.add(sites_[i], provenance_[i]);
  return out;
}

std::vector<std::string> validate_aggregate(const Aggregate& a) {
  std::vector<std::string> problems;
  const auto& sites = a.sites();
  const auto& prov = a.provenance();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    std::ostringstream os;
    if (prov[i].birth_index != i + 1) {
      os << "site " << sites[i] << " has birth_index " << prov[i].birth_index << ", expected "
         << i + 1;
    } else if (prov[i].predecessor) {
      const Site p = *prov[i].predecessor;
      auto j = a.index_of(p);
      if (!adjacent(p, sites[i])) {
        os << "predecessor " << p << " of " << sites[i] << " is not adjacent";
      } else if (!j || *j >= i) {
        os << "predecessor " << p << " of " << sites[i] << " was not occupied earlier";
      }
    }
    if (!os.str().empty()) problems.push_back(os.str());
  }
  return problems;
}

}  // namespace idla
