#pragma once

// Reference computations for tests, written independently of the library's
// solvers.

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "idla/site.hpp"

namespace idla::testing {

/// Exit law of a simple random walk from `start` out of `interior`, by
/// Gauss-Seidel iteration on the expected visit counts.
inline std::map<Site, double> iterative_exit_law(const std::vector<Site>& interior, Site start) {
  const std::set<Site> inside(interior.begin(), interior.end());
  std::map<Site, double> visits;
  for (Site s : interior) visits[s] = 0.0;
  for (int sweep = 0; sweep < 200000; ++sweep) {
    double change = 0;
    for (auto& [s, g] : visits) {
      double next = s == start ? 1.0 : 0.0;
      for (Site nb : neighbors(s)) {
        if (inside.contains(nb)) next += 0.25 * visits[nb];
      }
      change = std::max(change, std::abs(next - g));
      g = next;
    }
    if (change < 1e-15) break;
  }
  std::map<Site, double> law;
  for (const auto& [s, g] : visits) {
    for (Site nb : neighbors(s)) {
      if (!inside.contains(nb)) law[nb] += 0.25 * g;
    }
  }
  return law;
}

}  // namespace idla::testing
