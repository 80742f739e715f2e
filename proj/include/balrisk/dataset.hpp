#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace balrisk {

enum class Label : std::int8_t { negative = -1, positive = 1 };

inline constexpr double sign(Label y) noexcept { return y == Label::positive ? 1.0 : -1.0; }

// n labeled points in R^d, features stored row-major.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  explicit LabeledDataset(std::size_t dim);
  // Validates sizes and finiteness; throws DataError on violation.
  LabeledDataset(std::size_t dim, std::vector<double> features, std::vector<Label> labels);

  void reserve(std::size_t n);
  void push_back(std::span<const double> x, Label y);

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {features_.data() + i * dim_, dim_};
  }
  Label label(std::size_t i) const noexcept { return labels_[i]; }

  const std::vector<double>& features() const noexcept { return features_; }
  const std::vector<Label>& labels() const noexcept { return labels_; }

  std::size_t count_positive() const noexcept;
  std::size_t count_negative() const noexcept { return size() - count_positive(); }

  // Rows selected by `indices`, in that order.
  LabeledDataset subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> features_;
  std::vector<Label> labels_;
};

// Weight q of the measure P_{n,q}; strictly inside (0,1).
class WeightParam {
 public:
  explicit WeightParam(double q);
  double value() const noexcept { return q_; }

 private:
  double q_;
};

// Either an explicit weight q or the balanced mode q = p_hat.
class Weighting {
 public:
  static Weighting balanced() noexcept { return Weighting(); }
  static Weighting fixed(WeightParam q) noexcept { return Weighting(q.value()); }
  static Weighting fixed(double q) { return Weighting(WeightParam(q).value()); }

  bool is_balanced() const noexcept { return balanced_; }
  // Only meaningful when !is_balanced().
  double q() const noexcept { return q_; }

 private:
  Weighting() = default;
  explicit Weighting(double q) : balanced_(false), q_(q) {}

  bool balanced_ = true;
  double q_ = 0.0;
};

}  // namespace balrisk
