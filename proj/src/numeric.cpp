#include "balrisk/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "balrisk/error.hpp"

namespace balrisk {

namespace {

constexpr std::size_t kPairwiseBlock = 128;

double pairwise_impl(const double* v, std::size_t n) noexcept {
  if (n <= kPairwiseBlock) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_impl(v, half) + pairwise_impl(v + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) noexcept {
  return pairwise_impl(values.data(), values.size());
}

double mean(std::span<const double> values) {
  if (values.empty()) throw EmptyDatasetError("mean of an empty sequence");
  return pairwise_sum(values) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double m = mean(values);
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - m) * (values[i] - m);
  return pairwise_sum(sq) / static_cast<double>(values.size() - 1);
}

double quantile_type7(std::vector<double> values, double prob) {
  if (values.empty()) throw EmptyDatasetError("quantile of an empty sequence");
  if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("quantile probability must lie in [0,1]");
  std::sort(values.begin(), values.end());
  double h = (static_cast<double>(values.size()) - 1.0) * prob;
  auto lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("slope needs two or more paired points");
  double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw DomainError("slope undefined for constant abscissa");
  return sxy / sxx;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

double squared_norm(std::span<const double> a) noexcept { return dot(a, a); }

double euclidean_norm(std::span<const double> a) noexcept { return std::sqrt(squared_norm(a)); }

}  // namespace balrisk
