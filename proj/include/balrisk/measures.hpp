#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "balrisk/dataset.hpp"
#include "balrisk/loss.hpp"
#include "balrisk/sampler.hpp"

namespace balrisk {

using MeasurableFn = std::function<double(std::span<const double>, Label)>;
using Classifier = std::function<Label(std::span<const double>)>;

// p_hat = (#positives)/n, and 0 for an empty sample.
double estimate_class_prob(const LabeledDataset& data) noexcept;

// P_n(f). Throws EmptyDatasetError when n = 0.
double empirical_mean(const LabeledDataset& data, const MeasurableFn& f);

// P_{n,q}(f) = (q^{-1} P_n(f I+) + (1-q)^{-1} P_n(f I-)) / 2.
// In balanced mode the value is (P_{n,+} f + P_{n,-} f) / 2, with the
// convention that the mean over an empty class is 0.
double weighted_empirical(const LabeledDataset& data, const MeasurableFn& f, Weighting w);

// R_{n,q}(g) with l_g(x, y) = phi(y g(x)). Balanced mode raises
// DegenerateClassError when a class is empty.
double balanced_empirical_risk(const LabeledDataset& data, const LinearScore& score,
                               const LossSpec& loss, Weighting w);

// (P_{n,+}(g(X) != Y) + P_{n,-}(g(X) != Y)) / 2.
double zero_one_am_risk(const LabeledDataset& data, const Classifier& classifier);

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// (mean of l_g over positive draws + mean over negative draws) / 2, an
// unbiased estimate of R_p(g). Per-class draws so that a tiny prior does not
// starve the positive class.
MonteCarloEstimate mc_weighted_risk(const ClassConditionalSampler& sampler, const LinearScore& score,
                                    const LossSpec& loss, std::size_t draws_per_class,
                                    std::uint64_t seed);

// Same estimator evaluated on a sample drawn beforehand.
MonteCarloEstimate weighted_risk_on(const ClassSplitSample& sample, const LinearScore& score,
                                    const LossSpec& loss);

// Balanced risk difference R(g) - R(reference) on a common sample; the
// standard error is that of the paired difference.
MonteCarloEstimate paired_risk_difference(const ClassSplitSample& sample, const LinearScore& score,
                                          const LinearScore& reference, const LossSpec& loss);

}  // namespace balrisk
