#include "balrisk/knn.hpp"

#include <cmath>

#include "balrisk/error.hpp"
#include "balrisk/numeric.hpp"
#include "balrisk/random.hpp"

namespace balrisk {

double knn_radius(const LabeledDataset& train, std::span<const double> x, std::size_t k,
                  SearchMethod method) {
  if (k < 1 || k > train.size()) throw DomainError("k must satisfy 1 <= k <= n");
  if (x.size() != train.dim()) throw DomainError("query dimension does not match the data");
  std::vector<Neighbor> nn;
  if (method == SearchMethod::kd_tree ||
      (method == SearchMethod::automatic && train.dim() <= kKdTreeMaxDim)) {
    nn = KdTree(train.features(), train.dim()).knn(x, k);
  } else {
    nn = brute_force_knn(train.features(), train.dim(), x, k);
  }
  return std::sqrt(nn.back().dist_sq);
}

KnnModel::KnnModel(LabeledDataset train, std::size_t k, SearchMethod method)
    : train_(std::move(train)), k_(k), positives_(train_.count_positive()) {
  if (k_ < 1 || k_ > train_.size()) {
    throw DomainError("k = " + std::to_string(k_) + " outside [1, " + std::to_string(train_.size()) + "]");
  }
  p_hat_ = estimate_class_prob(train_);
  bool tree = method == SearchMethod::kd_tree ||
              (method == SearchMethod::automatic && train_.dim() <= kKdTreeMaxDim);
  if (tree) tree_ = std::make_shared<const KdTree>(train_.features(), train_.dim());
}

std::vector<Neighbor> KnnModel::neighbors(std::span<const double> x) const {
  if (x.size() != train_.dim()) throw DomainError("query dimension does not match the model");
  if (tree_) return tree_->knn(x, k_);
  return brute_force_knn(train_.features(), train_.dim(), x, k_);
}

std::size_t KnnModel::positive_votes(std::span<const double> x) const {
  std::size_t votes = 0;
  for (const Neighbor& nb : neighbors(x)) votes += train_.label(nb.index) == Label::positive;
  return votes;
}

double KnnModel::eta(std::span<const double> x) const {
  return static_cast<double>(positive_votes(x)) / static_cast<double>(k_);
}

Label KnnModel::classify(std::span<const double> x) const {
  if (positives_ == 0 || positives_ == train_.size()) {
    throw DegenerateClassError("balanced k-NN classification needs both classes in the training set");
  }
  // votes/k >= n_pos/n, compared exactly in integers.
  auto lhs = static_cast<unsigned __int128>(positive_votes(x)) * train_.size();
  auto rhs = static_cast<unsigned __int128>(positives_) * k_;
  return lhs >= rhs ? Label::positive : Label::negative;
}

double KnnModel::radius(std::span<const double> x) const { return std::sqrt(neighbors(x).back().dist_sq); }

std::vector<Label> KnnModel::classify_batch(std::span<const double> queries) const {
  std::size_t d = train_.dim();
  std::vector<Label> out(queries.size() / d);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = classify(queries.subspan(i * d, d));
  return out;
}

Label bayes_balanced_classify(const BayesOracle& oracle, std::span<const double> x) {
  return oracle.eta(x) >= oracle.p ? Label::positive : Label::negative;
}

namespace {

MonteCarloEstimate summarize(const std::vector<double>& v) {
  return {mean(v), std::sqrt(sample_variance(v) / static_cast<double>(v.size()))};
}

}  // namespace

MonteCarloEstimate excess_am_risk_identity(const BayesOracle& oracle, const Classifier& classifier,
                                           const ClassConditionalSampler& sampler, std::size_t draws,
                                           std::uint64_t seed) {
  if (draws == 0) throw DomainError("draws must be at least 1");
  double p = oracle.p;
  if (!(p > 0.0 && p < 1.0)) throw DomainError("oracle prior must lie in (0,1)");
  LabeledDataset sample = sampler.draw_labeled(draws, derive_seed(seed, {stream::marginal}));
  std::vector<double> terms(draws);
  for (std::size_t i = 0; i < draws; ++i) {
    auto x = sample.row(i);
    double eta = oracle.eta(x);
    Label bayes = eta >= p ? Label::positive : Label::negative;
    terms[i] = classifier(x) != bayes ? std::abs(eta - p) / (p * (1.0 - p)) : 0.0;
  }
  return summarize(terms);
}

MonteCarloEstimate direct_excess_am_risk(const BayesOracle& oracle, const Classifier& classifier,
                                         const ClassConditionalSampler& sampler,
                                         std::size_t draws_per_class, std::uint64_t seed) {
  if (draws_per_class == 0) throw DomainError("draws must be at least 1");
  ClassSplitSample s = sampler.draw_split(draws_per_class, seed);
  auto error_gap = [&](const std::vector<double>& rows, Label y) {
    std::vector<double> gap(rows.size() / s.dim);
    for (std::size_t i = 0; i < gap.size(); ++i) {
      std::span<const double> x(rows.data() + i * s.dim, s.dim);
      double err_g = classifier(x) != y ? 1.0 : 0.0;
      double err_bayes = bayes_balanced_classify(oracle, x) != y ? 1.0 : 0.0;
      gap[i] = err_g - err_bayes;
    }
    return gap;
  };
  auto pos = error_gap(s.positive, Label::positive);
  auto neg = error_gap(s.negative, Label::negative);
  MonteCarloEstimate e;
  e.value = mean(pos) + mean(neg);
  e.std_error = std::sqrt(sample_variance(pos) / static_cast<double>(pos.size()) +
                                sample_variance(neg) / static_cast<double>(neg.size()));
  return e;
}

}  // namespace balrisk
