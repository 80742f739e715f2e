#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace balrisk {

// Pairwise (cascade) summation. The result depends only on the input order,
// never on how callers chunk or parallelize the production of the terms.
double pairwise_sum(std::span<const double> values) noexcept;

double mean(std::span<const double> values);

// Unbiased sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> values);

// Empirical quantile, type 7 (linear interpolation between order statistics).
double quantile_type7(std::vector<double> values, double prob);

// Least-squares slope of y against x.
double ols_slope(std::span<const double> x, std::span<const double> y);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_norm(std::span<const double> a) noexcept;
double euclidean_norm(std::span<const double> a) noexcept;

}  // namespace balrisk
