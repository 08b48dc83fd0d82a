#include "idla/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "idla/aggregate.hpp"

namespace idla {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// 4-connected component of `start` inside `interior`, in BFS order.
std::vector<Site> component_of(std::span<const Site> interior, Site start) {
  const std::unordered_set<Site, SiteHash> inside(interior.begin(), interior.end());
  if (!inside.contains(start)) throw ConfigError("exit distribution: start is not in the interior");
  std::vector<Site> order{start};
  std::unordered_set<Site, SiteHash> seen{start};
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (Site nb : neighbors(order[head])) {
      if (inside.contains(nb) && seen.insert(nb).second) order.push_back(nb);
    }
  }
  return order;
}

/// Solves the SPD system with a sparse Cholesky factorization and one round of
/// iterative refinement.
Eigen::VectorXd solve_spd(const SparseMatrix& A, const Eigen::VectorXd& b) {
  Eigen::SimplicialLDLT<SparseMatrix> solver;
  solver.compute(A);
  if (solver.info() != Eigen::Success) throw NumericalError("sparse factorization failed");
  Eigen::VectorXd x = solver.solve(b);
  if (solver.info() != Eigen::Success) throw NumericalError("sparse solve failed");
  const Eigen::VectorXd residual = b - A * x;
  x += solver.solve(residual);
  if (!x.allFinite()) throw NumericalError("non-finite solution");
  return x;
}

}  // namespace

double ExitDistribution::probability(Site s) const {
  auto it = std::lower_bound(probabilities.begin(), probabilities.end(), s,
                             [](const auto& p, Site v) { return p.first < v; });
  return it != probabilities.end() && it->first == s ? it->second : 0.0;
}

double ExitDistribution::total() const {
  double sum = 0;
  for (const auto& [site, p] : probabilities) sum += p;
  return sum;
}

ExitDistribution exact_exit_distribution(std::span<const Site> interior, Site start) {
  if (interior.size() > kMaxExitInterior) throw ConfigError("exit distribution: interior too large");
  const std::vector<Site> comp = component_of(interior, start);
  const auto size = static_cast<Eigen::Index>(comp.size());
  std::unordered_map<Site, Eigen::Index, SiteHash> index;
  for (Eigen::Index i = 0; i < size; ++i) index[comp[static_cast<std::size_t>(i)]] = i;

  // The walk's transition matrix restricted to the component is symmetric, so
  // the expected visit counts g from `start` solve (I - P) g = e_start.
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index i = 0; i < size; ++i) {
    triplets.emplace_back(i, i, 1.0);
    for (Site nb : neighbors(comp[static_cast<std::size_t>(i)])) {
      if (auto it = index.find(nb); it != index.end()) triplets.emplace_back(i, it->second, -0.25);
    }
  }
  SparseMatrix A(size, size);
  A.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  rhs[0] = 1.0;
  const Eigen::VectorXd visits = solve_spd(A, rhs);

  std::map<Site, double> mass;
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Site nb : neighbors(comp[static_cast<std::size_t>(i)])) {
      if (!index.contains(nb)) mass[nb] += 0.25 * visits[i];
    }
  }
  ExitDistribution out;
  out.start = start;
  out.component = comp;
  std::sort(out.component.begin(), out.component.end());
  out.probabilities.assign(mass.begin(), mass.end());
  if (std::abs(out.total() - 1.0) > 1e-9) throw NumericalError("exit distribution does not sum to 1");
  return out;
}

std::map<Site, Rational> exact_exit_distribution_rational(std::span<const Site> interior,
                                                          Site start) {
  const std::vector<Site> comp = component_of(interior, start);
  const std::size_t size = comp.size();
  if (size > kMaxRationalInterior) {
    throw BudgetError("rational exit distribution is limited to 16 interior sites");
  }
  std::unordered_map<Site, std::size_t, SiteHash> index;
  for (std::size_t i = 0; i < size; ++i) index[comp[i]] = i;

  // Augmented system [(I - P) | e_start], Gauss-Jordan elimination.
  std::vector<std::vector<Rational>> m(size, std::vector<Rational>(size + 1, Rational(0)));
  const Rational quarter(1, 4);
  for (std::size_t i = 0; i < size; ++i) {
    m[i][i] = 1;
    for (Site nb : neighbors(comp[i])) {
      if (auto it = index.find(nb); it != index.end()) m[i][it->second] -= quarter;
    }
  }
  m[0][size] = 1;
  for (std::size_t col = 0; col < size; ++col) {
    std::size_t pivot = col;
    while (pivot < size && m[pivot][col] == 0) ++pivot;
    if (pivot == size) throw NumericalError("singular system");
    std::swap(m[pivot], m[col]);
    const Rational inv = Rational(1) / m[col][col];
    for (auto& v : m[col]) v *= inv;
    for (std::size_t row = 0; row < size; ++row) {
      if (row == col || m[row][col] == 0) continue;
      const Rational f = m[row][col];
      for (std::size_t k = col; k <= size; ++k) m[row][k] -= f * m[col][k];
    }
  }

  std::map<Site, Rational> out;
  for (std::size_t i = 0; i < size; ++i) {
    for (Site nb : neighbors(comp[i])) {
      if (!index.contains(nb)) out[nb] += quarter * m[i][size];
    }
  }
  return out;
}

AggregateLaw exact_small_aggregate_distribution(std::span<const LevelBatch> emissions,
                                                std::uint32_t max_total) {
  std::uint64_t total = 0;
  for (const LevelBatch& b : emissions) total += b.count;
  if (max_total > kMaxExactParticles || total > max_total) {
    throw BudgetError("exact aggregate law is limited to " + std::to_string(kMaxExactParticles) +
                      " particles");
  }
  AggregateLaw law{{SiteSet{}, 1.0}};
  for (const LevelBatch& batch : emissions) {
    for (std::uint32_t j = 0; j < batch.count; ++j) {
      const Site start = source(batch.level);
      AggregateLaw next;
      for (const auto& [set, p] : law) {
        auto add = [&](Site s, double q) {
          SiteSet grown = set;
          grown.insert(std::lower_bound(grown.begin(), grown.end(), s), s);
          next[grown] += p * q;
        };
        if (!std::binary_search(set.begin(), set.end(), start)) {
          add(start, 1.0);
          continue;
        }
        for (const auto& [site, q] : exact_exit_distribution(set, start).probabilities) add(site, q);
      }
      law = std::move(next);
    }
  }
  return law;
}

double total_variation(const AggregateLaw& a, const AggregateLaw& b) {
  double sum = 0;
  for (const auto& [set, p] : a) {
    auto it = b.find(set);
    sum += std::abs(p - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [set, q] : b) {
    if (!a.contains(set)) sum += q;
  }
  return 0.5 * sum;
}

namespace {

double exit_count_in_box(std::int64_t r, std::int64_t rp, const std::unordered_set<Site, SiteHash>& targets,
                         std::int64_t L, std::int64_t B) {
  // Unknowns: |x| < rp, |y| <= B. Lines |x| = rp absorb (value 1 on targets),
  // and the walk is killed when it leaves the box vertically.
  const std::int64_t width = 2 * rp - 1;
  const std::int64_t height = 2 * B + 1;
  const auto unknowns = static_cast<Eigen::Index>(width * height);
  auto id = [&](std::int64_t x, std::int64_t y) {
    return static_cast<Eigen::Index>((y + B) * width + (x + rp - 1));
  };
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(unknowns) * 5);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(unknowns);
  for (std::int64_t y = -B; y <= B; ++y) {
    for (std::int64_t x = -rp + 1; x <= rp - 1; ++x) {
      const Eigen::Index i = id(x, y);
      triplets.emplace_back(i, i, 1.0);
      for (Site nb : neighbors({x, y})) {
        if (std::abs(nb.x) == rp) {
          if (targets.contains(nb)) rhs[i] += 0.25;
        } else if (std::abs(nb.y) <= B) {
          triplets.emplace_back(i, id(nb.x, nb.y), -0.25);
        }
      }
    }
  }
  SparseMatrix A(unknowns, unknowns);
  A.setFromTriplets(triplets.begin(), triplets.end());
  const Eigen::VectorXd u = solve_spd(A, rhs);

  double sum = 0;
  for (std::int64_t y = -L; y <= L; ++y) {
    for (std::int64_t x = -r; x <= r; ++x) {
      if (std::abs(x) == rp) {
        sum += targets.contains({x, y}) ? 1.0 : 0.0;  // already on the line
      } else {
        sum += u[id(x, y)];
      }
    }
  }
  return sum;
}

}  // namespace

ExitCount expected_exit_count(std::uint32_t r, std::uint32_t r_prime, std::span<const Site> targets,
                              std::int64_t L, const ExitCountOptions& options) {
  if (r > r_prime) throw ConfigError("expected_exit_count requires r <= r'");
  if (r_prime == 0) throw ConfigError("expected_exit_count requires r' >= 1");
  if (L < 0) throw ConfigError("expected_exit_count requires L >= 0");
  const auto rp = static_cast<std::int64_t>(r_prime);
  std::unordered_set<Site, SiteHash> target_set;
  std::int64_t reach = L;
  for (Site t : targets) {
    if (std::abs(t.x) != rp) throw ConfigError("exit-count targets must lie on the lines |x| = r'");
    target_set.insert(t);
    reach = std::max(reach, std::abs(t.y));
  }
  ExitCount out;
  if (target_set.empty()) return out;

  std::int64_t B = reach + 4 * rp + 8;
  double previous = exit_count_in_box(r, rp, target_set, L, B);
  for (;;) {
    const std::int64_t next_B = 2 * B;
    if (next_B > options.max_half_height) {
      throw NumericalError("expected_exit_count did not converge within the box limit");
    }
    const double value = exit_count_in_box(r, rp, target_set, L, next_B);
    ++out.expansions;
    if (std::abs(value - previous) < options.tolerance) {
      out.value = value;
      out.half_height = next_B;
      return out;
    }
    previous = value;
    B = next_B;
  }
}

}  // namespace idla
