#include "balrisk/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "balrisk/error.hpp"

namespace balrisk {

LabeledDataset::LabeledDataset(std::size_t dim) : dim_(dim) {}

LabeledDataset::LabeledDataset(std::size_t dim, std::vector<double> features,
                               std::vector<Label> labels)
    : dim_(dim), features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.size() != labels_.size() * dim_) {
    throw DataError("feature buffer holds " + std::to_string(features_.size()) +
                    " values, expected " + std::to_string(labels_.size() * dim_));
  }
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (!std::isfinite(features_[i])) {
      throw DataError("non-finite feature at row " + std::to_string(i / std::max<std::size_t>(dim_, 1) + 1));
    }
  }
  for (Label y : labels_) {
    if (y != Label::positive && y != Label::negative) throw DataError("label must be -1 or +1");
  }
}

void LabeledDataset::reserve(std::size_t n) {
  features_.reserve(n * dim_);
  labels_.reserve(n);
}

void LabeledDataset::push_back(std::span<const double> x, Label y) {
  if (x.size() != dim_) {
    throw DataError("point has " + std::to_string(x.size()) + " coordinates, expected " +
                    std::to_string(dim_));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw DataError("non-finite feature value");
  }
  features_.insert(features_.end(), x.begin(), x.end());
  labels_.push_back(y);
}

std::size_t LabeledDataset::count_positive() const noexcept {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), Label::positive));
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out(dim_);
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    out.features_.insert(out.features_.end(), features_.begin() + static_cast<std::ptrdiff_t>(i * dim_),
                         features_.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim_));
    out.labels_.push_back(labels_[i]);
  }
  return out;
}

WeightParam::WeightParam(double q) : q_(q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("weight q must lie in (0,1), got " + std::to_string(q));
}

}  // namespace balrisk
