#include "idla/walk.hpp"

#include <algorithm>
#include <sstream>

namespace idla {

namespace {

std::string budget_message(Site start, std::uint64_t budget) {
  std::ostringstream os;
  os << "walk from " << start << " exceeded the step budget of " << budget << " steps";
  return os.str();
}

}  // namespace

StepBudgetExceeded::StepBudgetExceeded(Site s, std::uint64_t b)
    : std::runtime_error(budget_message(s, b)), start(s), budget(b) {}

Cluster::Cluster(StackField field) : field_(field) {
  x0_ = -8;
  y0_ = -8;
  width_ = 17;
  height_ = 17;
  cells_.assign(static_cast<std::size_t>(width_ * height_), Cell{});
}

std::int64_t Cluster::index_of(Site s) const {
  if (s.x < x0_ || s.x >= x0_ + width_ || s.y < y0_ || s.y >= y0_ + height_) return -1;
  return cells_[offset(s)].index;
}

std::uint64_t Cluster::consumed(Site s) const {
  if (s.x < x0_ || s.x >= x0_ + width_ || s.y < y0_ || s.y >= y0_ + height_) return 0;
  return cells_[offset(s)].used;
}

void Cluster::reserve_around(Site s) {
  if (interior(s)) return;
  std::int64_t lo_x = std::min(x0_, s.x - 1);
  std::int64_t hi_x = std::max(x0_ + width_ - 1, s.x + 1);
  std::int64_t lo_y = std::min(y0_, s.y - 1);
  std::int64_t hi_y = std::max(y0_ + height_ - 1, s.y + 1);
  // Grow geometrically on the side that overflowed.
  const std::int64_t grow_x = std::max<std::int64_t>(8, width_ / 2);
  const std::int64_t grow_y = std::max<std::int64_t>(8, height_ / 2);
  if (lo_x < x0_) lo_x -= grow_x;
  if (hi_x > x0_ + width_ - 1) hi_x += grow_x;
  if (lo_y < y0_) lo_y -= grow_y;
  if (hi_y > y0_ + height_ - 1) hi_y += grow_y;

  const std::int64_t new_width = hi_x - lo_x + 1;
  const std::int64_t new_height = hi_y - lo_y + 1;
  std::vector<Cell> fresh(static_cast<std::size_t>(new_width * new_height));
  for (std::int64_t row = 0; row < height_; ++row) {
    const auto src = cells_.begin() + row * width_;
    const auto dst = fresh.begin() + (row + y0_ - lo_y) * new_width + (x0_ - lo_x);
    std::copy(src, src + width_, dst);
  }
  cells_ = std::move(fresh);
  x0_ = lo_x;
  y0_ = lo_y;
  width_ = new_width;
  height_ = new_height;
}

std::size_t Cluster::insert(Site s) {
  reserve_around(s);
  Cell& c = cells_[offset(s)];
  if (c.index >= 0) throw std::logic_error("Cluster::insert: site already occupied");
  c.index = static_cast<std::int32_t>(sites_.size());
  sites_.push_back(s);
  return sites_.size() - 1;
}

template <bool kStack, bool kTrack>
WalkOutcome Cluster::walk(Site start, ParticleKey particle, const WalkOptions& options) {
  WalkOutcome out;
  if constexpr (kTrack) {
    out.visited.assign(options.monitors.size(), false);
  }
  auto track = [&](Site s) {
    if constexpr (kTrack) {
      for (std::size_t r = 0; r < options.monitors.size(); ++r) {
        if (!out.visited[r] && options.monitors[r].contains(s)) out.visited[r] = true;
      }
      if (options.record_path) out.path.push_back(s);
    }
  };

  reserve_around(start);
  track(start);
  Cell* cell = &cells_[offset(start)];
  if (cell->index < 0) {
    out.settled_site = start;
    return out;
  }

  const std::ptrdiff_t stride = width_;
  Cell* const base = cells_.data();
  // Site of a cell; the hot loop tracks only the cell pointer.
  auto site_of = [&](const Cell* c) {
    const std::ptrdiff_t off = c - base;
    return Site{x0_ + off % stride, y0_ + off / stride};
  };

  Site pos = start;
  const Cell* prev = cell;
  std::uint64_t steps = 0;
  std::uint64_t particle_bits = 0;
  std::uint64_t particle_block = 0;
  unsigned particle_left = 0;
  const std::uint64_t budget = options.step_budget;

  for (;;) {
    unsigned d;
    if constexpr (kStack) {
      const std::uint32_t k = cell->used++;
      if ((k & 31U) == 0) [[unlikely]] cell->bits = field_.stack_block(site_of(cell), k >> 5);
      d = static_cast<unsigned>(cell->bits >> (2 * (k & 31U))) & 3U;
    } else {
      if (particle_left == 0) {
        particle_bits = field_.particle_block(particle.level, particle.index, particle_block++);
        particle_left = 32;
      }
      d = static_cast<unsigned>(particle_bits) & 3U;
      particle_bits >>= 2;
      --particle_left;
    }
    // Direction order is +x, -x, +y, -y.
    std::ptrdiff_t move = (d & 2U) ? stride : 1;
    move = (d & 1U) ? -move : move;
    prev = cell;
    cell += move;
    ++steps;
    if constexpr (kTrack) track(site_of(cell));
    if (cell->index < 0) break;
    if (steps >= budget) [[unlikely]] throw StepBudgetExceeded(start, budget);
  }
  pos = site_of(cell);

  out.settled_site = pos;
  out.penultimate_site = site_of(prev);
  out.path_length = steps;
  return out;
}

WalkOutcome Cluster::settle(Site start, ParticleKey particle, const WalkOptions& options) {
  const bool track = !options.monitors.empty() || options.record_path;
  if (field_.mode == WalkMode::site_stack) {
    return track ? walk<true, true>(start, particle, options)
                 : walk<true, false>(start, particle, options);
  }
  return track ? walk<false, true>(start, particle, options)
               : walk<false, false>(start, particle, options);
}

}  // namespace idla
