#include "balrisk/loss.hpp"

#include <algorithm>
#include <cmath>

#include "balrisk/error.hpp"
#include "balrisk/numeric.hpp"

namespace balrisk {

double logistic_loss(double t) noexcept {
  return t >= 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
}

namespace {

// 1 / (1 + e^t) without overflow.
double logistic_tail(double t) noexcept {
  if (t >= 0.0) {
    double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

LossSpec logistic() {
  LossSpec s;
  s.kind = LossKind::logistic;
  s.name = "logistic";
  s.phi = logistic_loss;
  s.phi_prime = [](double t) { return -logistic_tail(t); };
  s.phi_second = [](double t) { return logistic_tail(t) * logistic_tail(-t); };
  return s;
}

LossSpec exponential() {
  LossSpec s;
  s.kind = LossKind::exponential;
  s.name = "exponential";
  s.phi = [](double t) { return std::exp(-t); };
  s.phi_prime = [](double t) { return -std::exp(-t); };
  s.phi_second = [](double t) { return std::exp(-t); };
  return s;
}

LossSpec squared() {
  LossSpec s;
  s.kind = LossKind::squared;
  s.name = "squared";
  s.phi = [](double t) { return (1.0 - t) * (1.0 - t); };
  s.phi_prime = [](double t) { return -2.0 * (1.0 - t); };
  s.phi_second = [](double) { return 2.0; };
  return s;
}

LossSpec squared_hinge() {
  LossSpec s;
  s.kind = LossKind::squared_hinge;
  s.name = "squared_hinge";
  s.phi = [](double t) {
    double h = std::max(0.0, 1.0 - t);
    return h * h;
  };
  s.phi_prime = [](double t) { return -2.0 * std::max(0.0, 1.0 - t); };
  s.phi_second = [](double t) { return t < 1.0 ? 2.0 : 0.0; };
  return s;
}

}  // namespace

LossSpec make_loss(LossKind kind) {
  switch (kind) {
    case LossKind::logistic: return logistic();
    case LossKind::exponential: return exponential();
    case LossKind::squared: return squared();
    case LossKind::squared_hinge: return squared_hinge();
    case LossKind::custom: break;
  }
  throw DomainError("no built-in loss for kind 'custom'");
}

LossSpec make_loss(std::string_view name) {
  if (name == "logistic") return logistic();
  if (name == "exponential") return exponential();
  if (name == "squared") return squared();
  if (name == "squared_hinge") return squared_hinge();
  throw DomainError("unknown loss '" + std::string(name) + "'");
}

LossSpec constant_loss(double value) {
  LossSpec s;
  s.kind = LossKind::custom;
  s.name = "constant";
  s.phi = [value](double) { return value; };
  s.phi_prime = [](double) { return 0.0; };
  s.phi_second = [](double) { return 0.0; };
  return s;
}

LossCurvature LossSpec::curvature(double m) const {
  if (!(m >= 0.0)) throw DomainError("interval bound M must be nonnegative");
  LossCurvature c;
  c.interval_bound = m;
  switch (kind) {
    case LossKind::logistic:
      // phi'' is even and decreasing in |t|; |phi'| is largest at t = -M.
      c.mu = phi_second(m);
      c.deriv_bound = logistic_tail(-m);
      return c;
    case LossKind::exponential:
      c.mu = std::exp(-m);
      c.deriv_bound = std::exp(m);
      return c;
    case LossKind::squared:
      c.mu = 2.0;
      c.deriv_bound = 2.0 * (1.0 + m);
      return c;
    case LossKind::squared_hinge:
      c.mu = m > 1.0 ? 0.0 : 2.0;
      c.deriv_bound = 2.0 * (1.0 + m);
      return c;
    case LossKind::custom: break;
  }
  constexpr int kGrid = 20001;
  c.mu = phi_second(-m);
  c.deriv_bound = std::abs(phi_prime(-m));
  for (int i = 0; i < kGrid; ++i) {
    double t = -m + 2.0 * m * i / (kGrid - 1);
    c.mu = std::min(c.mu, phi_second(t));
    c.deriv_bound = std::max(c.deriv_bound, std::abs(phi_prime(t)));
  }
  return c;
}

LinearScore::LinearScore(std::vector<double> beta, double norm_cap)
    : beta_(std::move(beta)), norm_cap_(norm_cap) {
  if (!(norm_cap > 0.0)) throw DomainError("norm cap u must be positive");
  double norm = euclidean_norm(beta_);
  if (!(norm <= norm_cap + kNormSlack)) {
    throw DomainError("score norm " + std::to_string(norm) + " exceeds cap " + std::to_string(norm_cap));
  }
}

LinearScore LinearScore::zero(std::size_t dim, double norm_cap) {
  return LinearScore(std::vector<double>(dim, 0.0), norm_cap);
}

double LinearScore::operator()(std::span<const double> x) const noexcept { return dot(beta_, x); }

}  // namespace balrisk
