#include "balrisk/erm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "balrisk/error.hpp"
#include "balrisk/measures.hpp"
#include "balrisk/numeric.hpp"
#include "balrisk/random.hpp"

namespace balrisk {

void OptimizerConfig::validate() const {
  if (max_iters < 1) throw DomainError("max_iters must be at least 1");
  if (!(tol_grad > 0.0) || !(tol_obj > 0.0)) throw DomainError("tolerances must be positive");
}

namespace {

// R(beta) = sum_i w_i phi(beta . z_i) with z_i = y_i x_i, i.e. the weighted
// empirical risk in per-sample form.
class WeightedObjective {
 public:
  WeightedObjective(const LabeledDataset& data, const LossSpec& loss, Weighting w)
      : loss_(loss), n_(data.size()), d_(data.dim()), z_cols_(data.dim()), weight_(data.size()) {
    if (data.empty()) throw EmptyDatasetError();
    std::size_t pos = data.count_positive();
    std::size_t neg = n_ - pos;
    if (pos == 0 || neg == 0) {
      throw DegenerateClassError("balanced ERM needs both classes; p_hat = " +
                                 std::to_string(estimate_class_prob(data)));
    }
    double wpos, wneg;
    if (w.is_balanced()) {
      wpos = 0.5 / static_cast<double>(pos);
      wneg = 0.5 / static_cast<double>(neg);
    } else {
      wpos = 0.5 / (static_cast<double>(n_) * w.q());
      wneg = 0.5 / (static_cast<double>(n_) * (1.0 - w.q()));
    }
    for (auto& col : z_cols_) col.resize(n_);
    z_rows_.resize(n_ * d_);
    for (std::size_t i = 0; i < n_; ++i) {
      double s = sign(data.label(i));
      weight_[i] = data.label(i) == Label::positive ? wpos : wneg;
      auto x = data.row(i);
      for (std::size_t j = 0; j < d_; ++j) {
        z_rows_[i * d_ + j] = s * x[j];
        z_cols_[j][i] = s * x[j];
      }
    }
    margins_.resize(n_);
    buf_.resize(n_);
  }

  std::size_t dim() const noexcept { return d_; }

  double value(std::span<const double> beta) {
    compute_margins(beta);
    for (std::size_t i = 0; i < n_; ++i) buf_[i] = weight_[i] * loss_.phi(margins_[i]);
    return pairwise_sum(buf_);
  }

  std::vector<double> gradient(std::span<const double> beta) {
    compute_margins(beta);
    std::vector<double> scaled(n_);
    for (std::size_t i = 0; i < n_; ++i) scaled[i] = weight_[i] * loss_.phi_prime(margins_[i]);
    std::vector<double> g(d_);
    for (std::size_t j = 0; j < d_; ++j) {
      for (std::size_t i = 0; i < n_; ++i) buf_[i] = scaled[i] * z_cols_[j][i];
      g[j] = pairwise_sum(buf_);
    }
    return g;
  }

  // Power-iteration estimate of the largest eigenvalue of
  // sum_i w_i phi''(m_i) z_i z_i^T at beta.
  double curvature_bound(std::span<const double> beta) {
    compute_margins(beta);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d_), static_cast<Eigen::Index>(d_));
    for (std::size_t i = 0; i < n_; ++i) {
      double c = weight_[i] * loss_.phi_second(margins_[i]);
      if (c == 0.0) continue;
      Eigen::Map<const Eigen::VectorXd> z(z_rows_.data() + i * d_, static_cast<Eigen::Index>(d_));
      h.noalias() += c * z * z.transpose();
    }
    Eigen::VectorXd v = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d_));
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] += 1e-3 * static_cast<double>(j);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
      Eigen::VectorXd hv = h * v;
      double norm = hv.norm();
      if (norm == 0.0) return 0.0;
      lambda = v.dot(hv);
      v = hv / norm;
    }
    // Rayleigh quotients approach the top eigenvalue from below; the max-row-sum
    // norm bounds it from above.
    double row_bound = h.cwiseAbs().rowwise().sum().maxCoeff();
    return std::min(std::max(lambda, 0.0) * 1.01, row_bound);
  }

 private:
  void compute_margins(std::span<const double> beta) {
    for (std::size_t i = 0; i < n_; ++i) {
      double m = 0.0;
      for (std::size_t j = 0; j < d_; ++j) m += beta[j] * z_rows_[i * d_ + j];
      margins_[i] = m;
    }
  }

  const LossSpec& loss_;
  std::size_t n_;
  std::size_t d_;
  std::vector<double> z_rows_;
  std::vector<std::vector<double>> z_cols_;
  std::vector<double> weight_;
  std::vector<double> margins_;
  std::vector<double> buf_;
};

std::vector<double> axpy(std::span<const double> x, double a, std::span<const double> y) {
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] + a * y[j];
  return out;
}

std::vector<double> difference(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] - b[j];
  return out;
}

}  // namespace

std::vector<double> balanced_risk_gradient(const LabeledDataset& data, const LinearScore& score,
                                           const LossSpec& loss, Weighting w) {
  if (score.dim() != data.dim()) throw DomainError("score dimension does not match the data");
  WeightedObjective obj(data, loss, w);
  return obj.gradient(score.beta());
}

std::vector<double> project_ball(std::span<const double> beta, double u) {
  if (!(u > 0.0)) throw DomainError("ball radius u must be positive");
  std::vector<double> out(beta.begin(), beta.end());
  double norm = euclidean_norm(beta);
  if (norm > u) {
    double scale = u / norm;
    for (double& v : out) v *= scale;
  }
  return out;
}

FitResult fit_constrained_balanced_erm(const LabeledDataset& data, const LossSpec& loss, double u,
                                       Weighting w, const OptimizerConfig& cfg) {
  cfg.validate();
  if (!(u > 0.0)) throw DomainError("norm cap u must be positive");
  WeightedObjective obj(data, loss, w);
  const std::size_t d = obj.dim();

  std::vector<double> beta(d, 0.0);
  if (cfg.init) {
    if (cfg.init->size() != d) throw DomainError("initial point has the wrong dimension");
    beta = project_ball(*cfg.init, u);
  }

  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 60;
  constexpr int kStallLimit = 5;

  double f = obj.value(beta);
  std::vector<double> g = obj.gradient(beta);
  double lhat = obj.curvature_bound(beta);
  const double base_step = lhat > 0.0 ? 1.0 / lhat : 1.0;
  double step = base_step;

  FitResult result{LinearScore::zero(d, u), f, 0, 0.0, false, "max_iters", {}};
  if (cfg.record_trace) result.trace.push_back(f);

  int stalled = 0;
  std::size_t it = 0;
  for (; it < cfg.max_iters; ++it) {
    std::vector<double> pg = difference(beta, project_ball(axpy(beta, -1.0, g), u));
    result.grad_norm = euclidean_norm(pg);
    if (result.grad_norm <= cfg.tol_grad * (1.0 + std::abs(f))) {
      result.converged = true;
      result.stop_reason = "gradient";
      break;
    }

    double t = cfg.step_rule == StepRule::fixed ? base_step : step;
    std::vector<double> next;
    double f_next = 0.0;
    bool accepted = false;
    for (int h = 0; h <= kMaxHalvings; ++h) {
      next = project_ball(axpy(beta, -t, g), u);
      f_next = obj.value(next);
      if (cfg.step_rule == StepRule::fixed) {
        accepted = true;
        break;
      }
      if (f_next <= f + kArmijo * dot(g, difference(next, beta))) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // No representable decrease along the projected arc.
      result.converged = true;
      result.stop_reason = "line_search";
      break;
    }

    std::vector<double> g_next = obj.gradient(next);
    std::vector<double> s = difference(next, beta);
    std::vector<double> y = difference(g_next, g);
    double sy = dot(s, y);
    // Barzilai-Borwein trial step for the next iteration.
    step = sy > 0.0 ? std::clamp(squared_norm(s) / sy, base_step * 1e-6, base_step * 1e6) : base_step;

    double decrease = f - f_next;
    beta = std::move(next);
    g = std::move(g_next);
    f = f_next;
    if (cfg.record_trace) result.trace.push_back(f);

    stalled = (cfg.step_rule == StepRule::backtracking && decrease <= cfg.tol_obj * (1.0 + std::abs(f)))
                  ? stalled + 1
                  : 0;
    if (stalled >= kStallLimit) {
      result.converged = true;
      result.stop_reason = "objective";
      ++it;
      break;
    }
  }
  result.iterations = it;
  result.objective = f;
  result.score = LinearScore(std::move(beta), u);
  return result;
}

FitResult estimate_oracle_score(const ClassConditionalSampler& sampler, const LossSpec& loss, double u,
                                double p, std::size_t mc_draws, std::uint64_t seed,
                                const OptimizerConfig& cfg) {
  if (mc_draws < 1) throw DomainError("mc_draws must be at least 1");
  WeightParam q(p);
  auto pos = static_cast<std::size_t>(std::llround(static_cast<double>(mc_draws) * p));
  pos = std::clamp<std::size_t>(pos, 1, std::max<std::size_t>(mc_draws, 2) - 1);
  std::size_t neg = std::max<std::size_t>(mc_draws, 2) - pos;
  ClassSplitSample s = sampler.draw_split(pos, neg, derive_seed(seed, {stream::oracle}));

  std::vector<double> features;
  features.reserve(s.positive.size() + s.negative.size());
  features.insert(features.end(), s.positive.begin(), s.positive.end());
  features.insert(features.end(), s.negative.begin(), s.negative.end());
  std::vector<Label> labels(pos, Label::positive);
  labels.insert(labels.end(), neg, Label::negative);
  LabeledDataset data(s.dim, std::move(features), std::move(labels));
  return fit_constrained_balanced_erm(data, loss, u, Weighting::fixed(q), cfg);
}

namespace {

// Eigenvalue range of the class second-moment matrix E[X X^T | Y = y].
std::pair<double, double> second_moment_eigen_range(const std::vector<double>& rows, std::size_t d) {
  auto dim = static_cast<Eigen::Index>(d);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
      rows.data(), static_cast<Eigen::Index>(rows.size() / d), dim);
  Eigen::MatrixXd v = (x.transpose() * x) / static_cast<double>(x.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

}  // namespace

BernsteinReport bernstein_empirical_check(const ClassConditionalSampler& sampler, const LossSpec& loss,
                                          double u, double q, double domain_radius,
                                          std::size_t num_scores, std::size_t draws,
                                          std::size_t oracle_draws, std::uint64_t seed) {
  if (!(u > 0.0) || !(domain_radius > 0.0)) throw DomainError("u and the domain radius must be positive");
  if (draws < 2 || num_scores < 1) throw DomainError("need at least two draws and one score");
  WeightParam weight(q);
  const double p = sampler.prior();
  const std::size_t d = sampler.dim();

  BernsteinReport report;
  FitResult ref = estimate_oracle_score(sampler, loss, u, p, oracle_draws, derive_seed(seed, {stream::oracle}));
  // The reference must minimize R_q, so refit with weight q when it differs from p.
  if (q != p) {
    ClassSplitSample s = sampler.draw_split(oracle_draws, oracle_draws, derive_seed(seed, {stream::oracle, 1}));
    std::vector<double> features(s.positive);
    features.insert(features.end(), s.negative.begin(), s.negative.end());
    std::vector<Label> labels(oracle_draws, Label::positive);
    labels.insert(labels.end(), oracle_draws, Label::negative);
    // With equal class counts, weight q' = b/(a+b) puts the class means in the
    // same ratio as R_q does: (1-q) p against q (1-p).
    double a = (1.0 - q) * p, b = q * (1.0 - p);
    ref = fit_constrained_balanced_erm(LabeledDataset(d, std::move(features), std::move(labels)), loss, u,
                                       Weighting::fixed(b / (a + b)));
  }
  const LinearScore& star = ref.score;
  report.reference_beta = star.beta();

  ClassSplitSample s = sampler.draw_split(draws, derive_seed(seed, {stream::risk}));
  auto [pos_lo, pos_hi] = second_moment_eigen_range(s.positive, d);
  auto [neg_lo, neg_hi] = second_moment_eigen_range(s.negative, d);
  report.sigma_max_sq = std::max(pos_hi, neg_hi);
  report.sigma_min_sq = std::min(pos_lo, neg_lo);
  report.curvature = loss.curvature(u * domain_radius);
  report.analytic_b = report.curvature.deriv_bound * report.curvature.deriv_bound * report.sigma_max_sq /
                      (report.curvature.mu * report.sigma_min_sq);

  const double wpos = (1.0 - q) * p;  // P(h) = wpos P+(D) + wneg P-(D), D = l_g - l_g*
  const double wneg = q * (1.0 - p);
  const double wpos2 = (1.0 - q) * (1.0 - q) * p;
  const double wneg2 = q * q * (1.0 - p);

  Rng rng = make_rng(seed, {stream::scores});
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif;

  auto deltas = [&](const std::vector<double>& rows, Label y, const LinearScore& g) {
    std::vector<double> out(rows.size() / d);
    for (std::size_t i = 0; i < out.size(); ++i) {
      std::span<const double> x(rows.data() + i * d, d);
      out[i] = loss.phi(sign(y) * g(x)) - loss.phi(sign(y) * star(x));
    }
    return out;
  };
  auto squares = [](std::vector<double> v) {
    for (double& t : v) t *= t;
    return v;
  };

  report.max_ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < num_scores; ++k) {
    // Uniform point in the ball of radius u.
    std::vector<double> beta(d);
    for (double& b : beta) b = gauss(rng);
    double r = u * std::pow(unif(rng), 1.0 / static_cast<double>(d)) / euclidean_norm(beta);
    for (double& b : beta) b *= r;
    LinearScore g(project_ball(beta, u), u);

    auto dp = deltas(s.positive, Label::positive, g);
    auto dn = deltas(s.negative, Label::negative, g);
    auto dp2 = squares(dp);
    auto dn2 = squares(dn);
    double ph = wpos * mean(dp) + wneg * mean(dn);
    double ph2 = wpos2 * mean(dp2) + wneg2 * mean(dn2);
    if (!(ph > kBernsteinDenominatorFloor)) {
      ++report.skipped;
      continue;
    }
    ++report.evaluated;
    double ratio = ph2 / ph;
    if (ratio > report.max_ratio) {
      // Linearized ratio: R_hat - R ~ (num - R den) / den per class.
      std::vector<double> lin_pos(dp.size()), lin_neg(dn.size());
      for (std::size_t i = 0; i < dp.size(); ++i) lin_pos[i] = (wpos2 * dp2[i] - ratio * wpos * dp[i]) / ph;
      for (std::size_t i = 0; i < dn.size(); ++i) lin_neg[i] = (wneg2 * dn2[i] - ratio * wneg * dn[i]) / ph;
      report.max_ratio = ratio;
      report.max_ratio_std_error = std::sqrt(sample_variance(lin_pos) / static_cast<double>(lin_pos.size()) +
                                             sample_variance(lin_neg) / static_cast<double>(lin_neg.size()));
    }
  }
  if (report.evaluated == 0) report.max_ratio = 0.0;
  return report;
}

}  // namespace balrisk
