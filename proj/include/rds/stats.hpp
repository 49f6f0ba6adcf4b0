#pragma once

// Small statistics helpers shared by the experiments.

#include <cstddef>
#include <span>
#include <vector>

namespace rds {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Average ranks (1-based), ties share the mean rank.
std::vector<double> average_ranks(std::span<const double> values);
double pearson(std::span<const double> a, std::span<const double> b);
/// Spearman rank correlation with tie-averaged ranks.
double spearman(std::span<const double> a, std::span<const double> b);

double poisson_pmf(std::size_t k, double mean);
/// Total-variation distance between an empirical count distribution and
/// Poisson(mean), including the Poisson mass beyond the observed range.
double poisson_total_variation(std::span<const std::size_t> counts, double mean);

double mean_of(std::span<const double> v);

}  // namespace rds
