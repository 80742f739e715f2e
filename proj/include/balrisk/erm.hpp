#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "balrisk/dataset.hpp"
#include "balrisk/loss.hpp"
#include "balrisk/sampler.hpp"

namespace balrisk {

enum class StepRule { fixed, backtracking };

struct OptimizerConfig {
  std::size_t max_iters = 10000;
  StepRule step_rule = StepRule::backtracking;
  std::optional<std::vector<double>> init;  // zero vector when empty
  double tol_grad = 1e-8;   // stop when ||projected gradient|| <= tol_grad * (1 + |objective|)
  double tol_obj = 1e-15;   // stop when the decrease stays below tol_obj * (1 + |objective|)
  std::uint64_t seed = 0;
  bool record_trace = false;

  void validate() const;
};

struct FitResult {
  LinearScore score;
  double objective = 0.0;
  std::size_t iterations = 0;
  double grad_norm = 0.0;  // norm of the projected-gradient step beta - P(beta - grad)
  bool converged = false;
  std::string stop_reason;
  std::vector<double> trace;  // objective after each iteration, starting at the initial point
};

// Gradient in beta of R_{n,q}(g_beta): (1/2n) sum_i w_i phi'(beta . x_i y_i) x_i y_i
// with w_i = 1/q on positives and 1/(1-q) on negatives (q = p_hat in balanced mode).
std::vector<double> balanced_risk_gradient(const LabeledDataset& data, const LinearScore& score,
                                           const LossSpec& loss, Weighting w);

// Euclidean projection onto {||beta|| <= u}.
std::vector<double> project_ball(std::span<const double> beta, double u);

// Projected gradient descent with Armijo backtracking on R_{n,q} over the ball
// of radius u. Non-convergence is reported in the result, not thrown.
FitResult fit_constrained_balanced_erm(const LabeledDataset& data, const LossSpec& loss, double u,
                                       Weighting w, const OptimizerConfig& cfg = {});

// Proxy for g*_p: fits the p-weighted risk on round(N p) positive and
// N - round(N p) negative draws (at least one of each).
FitResult estimate_oracle_score(const ClassConditionalSampler& sampler, const LossSpec& loss, double u,
                                double p, std::size_t mc_draws, std::uint64_t seed,
                                const OptimizerConfig& cfg = {});

struct BernsteinReport {
  double max_ratio = 0.0;            // max over sampled scores of P(h^2) / P(h)
  double max_ratio_std_error = 0.0;  // delta-method standard error at the maximizer
  std::size_t evaluated = 0;         // scores whose P(h) cleared the threshold
  std::size_t skipped = 0;
  double analytic_b = 0.0;           // D^2 sigma_max^2 / (mu sigma_min^2)
  double sigma_max_sq = 0.0;
  double sigma_min_sq = 0.0;
  LossCurvature curvature;
  std::vector<double> reference_beta;
};

inline constexpr double kBernsteinDenominatorFloor = 1e-6;

// Monte-Carlo check of P(h^2) <= B P(h) for h = (1-q)(l_g - l_g*) I+ + q (l_g - l_g*) I-
// over `num_scores` random feasible scores. `domain_radius` bounds ||X|| on the
// sampler's support and fixes the margin interval [-u R, u R] of the analytic constant.
BernsteinReport bernstein_empirical_check(const ClassConditionalSampler& sampler, const LossSpec& loss,
                                          double u, double q, double domain_radius,
                                          std::size_t num_scores, std::size_t draws,
                                          std::size_t oracle_draws, std::uint64_t seed);

}  // namespace balrisk
