#include "balrisk/measures.hpp"
#include "balrisk/random.hpp"

#include <cmath>
#include <vector>

#include "balrisk/error.hpp"
#include "balrisk/numeric.hpp"
#include "balrisk/parallel.hpp"

namespace balrisk {

ClassSplitSample ClassConditionalSampler::draw_split(std::size_t per_class, std::uint64_t seed) const {
  return draw_split(per_class, per_class, seed);
}

ClassSplitSample ClassConditionalSampler::draw_split(std::size_t positives, std::size_t negatives,
                                                     std::uint64_t seed) const {
  ClassSplitSample s;
  s.dim = dim();
  s.positive = draw_class(Label::positive, positives, derive_seed(seed, {stream::positive}));
  s.negative = draw_class(Label::negative, negatives, derive_seed(seed, {stream::negative}));
  return s;
}

double estimate_class_prob(const LabeledDataset& data) noexcept {
  if (data.empty()) return 0.0;
  return static_cast<double>(data.count_positive()) / static_cast<double>(data.size());
}

double empirical_mean(const LabeledDataset& data, const MeasurableFn& f) {
  if (data.empty()) throw EmptyDatasetError();
  std::vector<double> v(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) v[i] = f(data.row(i), data.label(i));
  return pairwise_sum(v) / static_cast<double>(data.size());
}

namespace {

// Per-class values of f, in sample order.
struct ClassTerms {
  std::vector<double> positive;
  std::vector<double> negative;
};

ClassTerms split_terms(const LabeledDataset& data, const MeasurableFn& f) {
  ClassTerms t;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double v = f(data.row(i), data.label(i));
    (data.label(i) == Label::positive ? t.positive : t.negative).push_back(v);
  }
  return t;
}

double class_mean_or_zero(const std::vector<double>& v) {
  return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
}

}  // namespace

double weighted_empirical(const LabeledDataset& data, const MeasurableFn& f, Weighting w) {
  if (data.empty()) throw EmptyDatasetError();
  ClassTerms t = split_terms(data, f);
  if (w.is_balanced()) return 0.5 * (class_mean_or_zero(t.positive) + class_mean_or_zero(t.negative));
  double n = static_cast<double>(data.size());
  double q = w.q();
  return 0.5 * (pairwise_sum(t.positive) / n / q + pairwise_sum(t.negative) / n / (1.0 - q));
}

double balanced_empirical_risk(const LabeledDataset& data, const LinearScore& score,
                               const LossSpec& loss, Weighting w) {
  if (data.empty()) throw EmptyDatasetError();
  if (score.dim() != data.dim()) throw DomainError("score dimension does not match the data");
  if (w.is_balanced()) {
    std::size_t pos = data.count_positive();
    if (pos == 0 || pos == data.size()) {
      throw DegenerateClassError("balanced risk needs both classes; p_hat = " +
                                 std::to_string(estimate_class_prob(data)));
    }
  }
  return weighted_empirical(
      data, [&](std::span<const double> x, Label y) { return loss.phi(sign(y) * score(x)); }, w);
}

double zero_one_am_risk(const LabeledDataset& data, const Classifier& classifier) {
  std::size_t pos = data.count_positive();
  std::size_t neg = data.size() - pos;
  if (pos == 0 || neg == 0) throw DegenerateClassError("AM risk needs both classes");
  std::size_t err_pos = 0, err_neg = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    Label y = data.label(i);
    if (classifier(data.row(i)) != y) ++(y == Label::positive ? err_pos : err_neg);
  }
  return 0.5 * (static_cast<double>(err_pos) / static_cast<double>(pos) +
                static_cast<double>(err_neg) / static_cast<double>(neg));
}

namespace {

constexpr std::size_t kEvalChunk = 8192;

// Loss values over one class block, computed in fixed-size chunks.
std::vector<double> class_losses(const std::vector<double>& rows, std::size_t dim, Label y,
                                 const std::function<double(std::span<const double>, Label)>& f) {
  std::size_t count = rows.size() / dim;
  std::vector<double> out(count);
  std::size_t chunks = (count + kEvalChunk - 1) / kEvalChunk;
  parallel_for(chunks, [&](std::size_t c) {
    std::size_t end = std::min(count, (c + 1) * kEvalChunk);
    for (std::size_t i = c * kEvalChunk; i < end; ++i) out[i] = f({rows.data() + i * dim, dim}, y);
  });
  return out;
}

MonteCarloEstimate balanced_mean(const ClassSplitSample& sample,
                                 const std::function<double(std::span<const double>, Label)>& f) {
  if (sample.positive_count() == 0 || sample.negative_count() == 0) {
    throw DegenerateClassError("Monte-Carlo risk needs draws from both classes");
  }
  auto pos = class_losses(sample.positive, sample.dim, Label::positive, f);
  auto neg = class_losses(sample.negative, sample.dim, Label::negative, f);
  MonteCarloEstimate e;
  e.value = 0.5 * (mean(pos) + mean(neg));
  e.std_error = 0.5 * std::sqrt(sample_variance(pos) / static_cast<double>(pos.size()) +
                                sample_variance(neg) / static_cast<double>(neg.size()));
  return e;
}

}  // namespace

MonteCarloEstimate weighted_risk_on(const ClassSplitSample& sample, const LinearScore& score,
                                    const LossSpec& loss) {
  return balanced_mean(sample, [&](std::span<const double> x, Label y) {
    return loss.phi(sign(y) * score(x));
  });
}

MonteCarloEstimate paired_risk_difference(const ClassSplitSample& sample, const LinearScore& score,
                                          const LinearScore& reference, const LossSpec& loss) {
  return balanced_mean(sample, [&](std::span<const double> x, Label y) {
    return loss.phi(sign(y) * score(x)) - loss.phi(sign(y) * reference(x));
  });
}

MonteCarloEstimate mc_weighted_risk(const ClassConditionalSampler& sampler, const LinearScore& score,
                                    const LossSpec& loss, std::size_t draws_per_class,
                                    std::uint64_t seed) {
  if (draws_per_class == 0) throw DomainError("draws_per_class must be at least 1");
  return weighted_risk_on(sampler.draw_split(draws_per_class, seed), score, loss);
}

}  // namespace balrisk
