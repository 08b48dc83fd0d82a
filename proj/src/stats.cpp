#include "idla/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace idla::stats {

MeanSe mean_se(std::span<const double> xs) {
  MeanSe out;
  out.samples = xs.size();
  if (xs.empty()) return out;
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() < 2) return out;
  double ss = 0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  const double var = ss / static_cast<double>(xs.size() - 1);
  out.se = std::sqrt(var / static_cast<double>(xs.size()));
  return out;
}

MeanSe proportion(std::size_t successes, std::size_t trials) {
  MeanSe out;
  out.samples = trials;
  if (trials == 0) return out;
  out.mean = static_cast<double>(successes) / static_cast<double>(trials);
  out.se = std::sqrt(out.mean * (1.0 - out.mean) / static_cast<double>(trials));
  return out;
}

double median(std::vector<double> xs) {
  if (xs.empty()) return std::nan("");
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

double slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0;
  double sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

ChiSquare chi_square(std::span<const std::size_t> observed, std::span<const double> probabilities) {
  if (observed.size() != probabilities.size()) throw std::invalid_argument("chi_square: size mismatch");
  const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::size_t{0}));
  ChiSquare out;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = probabilities[i] * total;
    if (expected <= 0) {
      if (observed[i] != 0) {
        out.statistic = INFINITY;
        out.p_value = 0;
        return out;
      }
      continue;
    }
    const double d = static_cast<double>(observed[i]) - expected;
    out.statistic += d * d / expected;
    ++cells;
  }
  out.dof = cells > 0 ? cells - 1 : 0;
  if (out.dof == 0) return out;
  boost::math::chi_squared dist(static_cast<double>(out.dof));
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

bool within_sigma(double a, double se_a, double b, double se_b, double z) {
  return std::abs(a - b) <= z * std::sqrt(se_a * se_a + se_b * se_b);
}

}  // namespace idla::stats
