#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace idla::stats {

struct MeanSe {
  double mean = 0;
  double se = 0;
  std::size_t samples = 0;
};

/// Sample mean and its standard error (unbiased sample variance).
MeanSe mean_se(std::span<const double> xs);

/// Proportion of successes with the exact binomial standard error
/// sqrt(p (1 - p) / N).
MeanSe proportion(std::size_t successes, std::size_t trials);

double median(std::vector<double> xs);

/// Least-squares slope of y on x.
double slope(std::span<const double> x, std::span<const double> y);

/// Upper-tail p-value of Pearson's chi-square statistic for observed counts
/// against expected probabilities. Cells with zero expected probability must
/// have zero counts.
struct ChiSquare {
  double statistic = 0;
  std::size_t dof = 0;
  double p_value = 1;
};
ChiSquare chi_square(std::span<const std::size_t> observed, std::span<const double> probabilities);

/// |a - b| <= z * sqrt(se_a^2 + se_b^2).
bool within_sigma(double a, double se_a, double b, double se_b, double z = 3.0);

}  // namespace idla::stats
