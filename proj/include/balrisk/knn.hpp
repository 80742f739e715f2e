#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "balrisk/dataset.hpp"
#include "balrisk/kdtree.hpp"
#include "balrisk/measures.hpp"
#include "balrisk/sampler.hpp"

namespace balrisk {

enum class SearchMethod { automatic, brute_force, kd_tree };

// Tree search is used automatically up to this dimension.
inline constexpr std::size_t kKdTreeMaxDim = 16;

// k-th smallest Euclidean distance from x to the training points.
double knn_radius(const LabeledDataset& train, std::span<const double> x, std::size_t k,
                  SearchMethod method = SearchMethod::brute_force);

// Balanced k-NN rule: eta_hat(x) = (#positives among the k nearest) / k, with
// boundary ties broken by ascending (distance, index) so exactly k points
// vote; predicts +1 iff eta_hat(x) >= p_hat.
class KnnModel {
 public:
  // Requires 1 <= k <= n. eta() works for any labels; classify() needs both
  // classes present (p_hat in (0,1)) and raises DegenerateClassError otherwise.
  KnnModel(LabeledDataset train, std::size_t k, SearchMethod method = SearchMethod::automatic);

  std::size_t k() const noexcept { return k_; }
  double p_hat() const noexcept { return p_hat_; }
  const LabeledDataset& train() const noexcept { return train_; }
  bool uses_tree() const noexcept { return tree_ != nullptr; }

  std::vector<Neighbor> neighbors(std::span<const double> x) const;
  std::size_t positive_votes(std::span<const double> x) const;
  double eta(std::span<const double> x) const;
  Label classify(std::span<const double> x) const;
  double radius(std::span<const double> x) const;

  // Labels for each row of a row-major query block.
  std::vector<Label> classify_batch(std::span<const double> queries) const;

 private:
  LabeledDataset train_;
  std::size_t k_;
  std::size_t positives_;
  double p_hat_;
  std::shared_ptr<const KdTree> tree_;
};

// Regression function eta(x) = P(Y = +1 | X = x) and the prior p of the
// population, from which the balanced Bayes rule is built.
struct BayesOracle {
  std::function<double(std::span<const double>)> eta;
  double p = 0.5;
};

// g*_p(x) = +1 iff eta(x) >= p.
Label bayes_balanced_classify(const BayesOracle& oracle, std::span<const double> x);

// Monte-Carlo estimate of E[1{g(X) != g*_p(X)} |eta(X) - p| / (p(1-p))] over
// draws from the X-marginal of `sampler`. This is the excess of the summed
// class-error risk P+(g != Y) + P-(g != Y), i.e. twice the AM-risk excess.
MonteCarloEstimate excess_am_risk_identity(const BayesOracle& oracle, const Classifier& classifier,
                                           const ClassConditionalSampler& sampler, std::size_t draws,
                                           std::uint64_t seed);

// Direct estimate of the same excess, [P+(g != Y) + P-(g != Y)] minus the
// same for g*_p, from per-class draws of the 0-1 errors of both classifiers
// (paired on common draws).
MonteCarloEstimate direct_excess_am_risk(const BayesOracle& oracle, const Classifier& classifier,
                                         const ClassConditionalSampler& sampler,
                                         std::size_t draws_per_class, std::uint64_t seed);

}  // namespace balrisk
