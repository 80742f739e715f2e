#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "balrisk/dataset.hpp"

namespace balrisk {

// Points drawn from each class-conditional law separately.
struct ClassSplitSample {
  std::size_t dim = 0;
  std::vector<double> positive;  // row-major
  std::vector<double> negative;

  std::size_t positive_count() const noexcept { return dim ? positive.size() / dim : 0; }
  std::size_t negative_count() const noexcept { return dim ? negative.size() / dim : 0; }
};

// Source of class-conditional draws. Implementations must be deterministic in
// (label, count, seed) and safe to call concurrently.
class ClassConditionalSampler {
 public:
  virtual ~ClassConditionalSampler() = default;

  virtual std::size_t dim() const noexcept = 0;
  // P(Y = +1) of the joint law.
  virtual double prior() const noexcept = 0;
  // `count` i.i.d. rows from the law of X given Y = y, row-major.
  virtual std::vector<double> draw_class(Label y, std::size_t count, std::uint64_t seed) const = 0;
  // n i.i.d. pairs (X, Y) from the joint law.
  virtual LabeledDataset draw_labeled(std::size_t n, std::uint64_t seed) const = 0;

  ClassSplitSample draw_split(std::size_t per_class, std::uint64_t seed) const;
  ClassSplitSample draw_split(std::size_t positives, std::size_t negatives, std::uint64_t seed) const;
};

}  // namespace balrisk
