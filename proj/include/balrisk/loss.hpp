#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace balrisk {

enum class LossKind { logistic, exponential, squared, squared_hinge, custom };

// Curvature constants of a margin loss over the interval [-M, M].
struct LossCurvature {
  double interval_bound = 0.0;  // M
  double mu = 0.0;              // inf of phi'' on [-M, M]
  double deriv_bound = 0.0;     // D = sup |phi'| on [-M, M]
};

// Margin loss phi, applied as l_g(x, y) = phi(y * g(x)).
struct LossSpec {
  LossKind kind = LossKind::custom;
  std::string name;
  std::function<double(double)> phi;
  std::function<double(double)> phi_prime;
  std::function<double(double)> phi_second;

  // Closed form for the built-in losses; grid search over phi'' and |phi'|
  // for custom ones.
  LossCurvature curvature(double interval_bound) const;
};

LossSpec make_loss(LossKind kind);
// Accepts "logistic", "exponential", "squared", "squared_hinge".
LossSpec make_loss(std::string_view name);

// Numerically stable log(1 + exp(-t)).
double logistic_loss(double t) noexcept;

// A fixed-value loss; handy for degenerate checks.
LossSpec constant_loss(double value);

// Linear score g_beta(x) = beta . x restricted to the ball ||beta|| <= norm_cap.
class LinearScore {
 public:
  static constexpr double kNormSlack = 1e-9;

  // Throws DomainError when norm_cap <= 0 or ||beta|| exceeds the cap.
  LinearScore(std::vector<double> beta, double norm_cap);
  static LinearScore zero(std::size_t dim, double norm_cap);

  const std::vector<double>& beta() const noexcept { return beta_; }
  double norm_cap() const noexcept { return norm_cap_; }
  std::size_t dim() const noexcept { return beta_.size(); }
  double operator()(std::span<const double> x) const noexcept;

 private:
  std::vector<double> beta_;
  double norm_cap_;
};

}  // namespace balrisk
