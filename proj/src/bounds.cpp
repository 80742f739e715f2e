#include "balrisk/bounds.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "balrisk/error.hpp"

namespace balrisk {

namespace {

constexpr double kE = std::numbers::e;

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

void check_prob(double x, const char* what) { require(x > 0.0 && x < 1.0, what); }

}  // namespace

double compute_subroot_constant() {
  auto f = [](double t) { return std::exp(-t) * std::sqrt(1.0 + t); };
  double err = 0.0;
  double inner = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, 0.0, std::numeric_limits<double>::infinity(), 30, 1e-14, &err);
  return 12.0 * inner;
}

ConstantTable ConstantTable::compute() {
  ConstantTable t;
  t.c_subroot = compute_subroot_constant();
  t.c1 = 108.0 * t.c_subroot * t.c_subroot;
  t.c_vc = 12.0;
  t.k1 = 5.0 * t.c_vc;
  t.k2 = 64.0 * t.c_vc * t.c_vc;
  return t;
}

namespace {

void check_slow_inputs(const BoundInputs& in) {
  require(in.n >= 1.0, "n must be at least 1");
  check_prob(in.p, "p must lie in (0,1)");
  require(in.v >= 1.0 && in.A >= 1.0, "VC parameters need v >= 1 and A >= 1");
  require(in.U > 0.0, "envelope U must be positive");
  require(in.sigma_plus > 0.0 && in.sigma_plus <= in.U, "sigma_plus must lie in (0, U]");
  require(in.sigma_minus > 0.0 && in.sigma_minus <= in.U, "sigma_minus must lie in (0, U]");
  check_prob(in.delta, "delta must lie in (0,1)");
  require(in.K_slow > 0.0, "slow-rate constant K must be positive");
}

// K sigma_front sqrt(v/(np) log(K A U / (delta sigma_log sqrt p))) with the
// precondition evaluated at sigma_log.
BoundValue slow_rate_core(const BoundInputs& in, double sigma_front, double sigma_log) {
  double arg = in.K_slow * in.A * in.U / (in.delta * sigma_log * std::sqrt(in.p));
  double lg = std::log(arg);
  double np = in.n * in.p;
  BoundValue b;
  b.small_log_argument = arg < kE;
  b.value = in.K_slow * sigma_front * std::sqrt(in.v / np * lg);
  double need = std::max(in.U * in.U / (sigma_log * sigma_log) * in.v * lg, 8.0 * std::log(1.0 / in.delta));
  b.valid = np >= need;
  return b;
}

}  // namespace

BoundValue slow_rate_bound(const BoundInputs& in, const ConstantTable&) {
  check_slow_inputs(in);
  return slow_rate_core(in, in.sigma_plus, in.sigma_plus);
}

BoundValue slow_rate_erm_bound(const BoundInputs& in, const ConstantTable&) {
  check_slow_inputs(in);
  require(in.p <= 0.5, "the excess-risk bound needs p <= 1/2");
  return slow_rate_core(in, in.sigma_max(), in.sigma_min());
}

BoundValue fast_rate_bound(double n, double q, double v, double A, double B, double delta, double K,
                           const ConstantTable& consts) {
  require(n >= 1.0, "n must be at least 1");
  check_prob(q, "q must lie in (0,1)");
  require(v >= 1.0 && A >= 1.0, "VC parameters need v >= 1 and A >= 1");
  require(B > 0.0, "Bernstein constant B must be positive");
  check_prob(delta, "delta must lie in (0,1)");
  require(K > 1.0, "K must exceed 1");
  double arg = 5.0 * A * std::sqrt(n) / delta;
  BoundValue b;
  b.small_log_argument = arg < kE;
  b.value = consts.c1 * B * K * v * std::log(arg) / (2.0 * n * q * (1.0 - q));
  return b;
}

VcParams vc_transform(double v, double A) {
  require(v >= 1.0 && A >= 1.0, "VC parameters need v >= 1 and A >= 1");
  return {4.0 * v + 1.0, 6.0 * A};
}

double bernstein_constant_linear(double D, double mu, double sigma_max_sq, double sigma_min_sq) {
  require(D > 0.0 && mu > 0.0 && sigma_max_sq > 0.0 && sigma_min_sq > 0.0,
          "Bernstein constant inputs must be positive");
  return D * D * sigma_max_sq / (mu * sigma_min_sq);
}

ChernoffInterval chernoff_interval(double mu, double delta) {
  require(mu > 0.0, "mu must be positive");
  check_prob(delta, "delta must lie in (0,1)");
  double lg = std::log(1.0 / delta);
  ChernoffInterval c;
  c.lower = std::max(0.0, (1.0 - std::sqrt(2.0 * lg / mu)) * mu);
  c.upper = (1.0 + std::sqrt(3.0 * lg / mu)) * mu;
  return c;
}

PRatioBound p_ratio_bound(double n, double p, double delta) {
  require(n >= 1.0, "n must be at least 1");
  check_prob(p, "p must lie in (0,1)");
  check_prob(delta, "delta must lie in (0,1)");
  PRatioBound r;
  r.z_n = std::sqrt(2.0 * std::log(1.0 / delta) / (n * p));
  r.valid = r.z_n < 1.0;
  r.ratio_bound = r.valid ? r.z_n / (1.0 - r.z_n) : std::numeric_limits<double>::infinity();
  r.simplified_bound = r.z_n <= 0.5 ? 2.0 * r.z_n : std::numeric_limits<double>::infinity();
  return r;
}

double unit_ball_volume(std::size_t d) {
  require(d >= 1, "dimension must be at least 1");
  double h = 0.5 * static_cast<double>(d);
  return std::exp(h * std::log(std::numbers::pi) - std::lgamma(h + 1.0));
}

KnnEnvelope knn_radius_envelope(std::size_t k, std::size_t n, const KnnBoundParams& params) {
  require(k >= 1 && k <= n, "k must satisfy 1 <= k <= n");
  require(params.b_x > 0.0, "b_X must be positive");
  require(params.c > 0.0 && params.c <= 1.0, "corner constant c must lie in (0,1]");
  require(params.T > 0.0, "T must be positive");
  check_prob(params.delta, "delta must lie in (0,1)");
  double d = static_cast<double>(params.d);
  double mass = static_cast<double>(n) * params.b_x * params.c * params.v_d();
  KnnEnvelope e;
  e.tau_bar = std::pow(2.0 * static_cast<double>(k) / mass, 1.0 / d);
  double lower = 8.0 * d * std::log(12.0 * static_cast<double>(n) / params.delta);
  double upper = std::pow(params.T, d) * mass / 2.0;
  auto kk = static_cast<double>(k);
  e.precondition_ok = lower <= kk && kk <= upper;
  return e;
}

SubrootFixedPoint subroot_fixed_point(double b, double c) {
  require(b >= 0.0 && c >= 0.0 && (b > 0.0 || c > 0.0), "need b, c >= 0, not both zero");
  double root = 0.5 * (b + std::sqrt(b * b + 4.0 * c));
  SubrootFixedPoint f;
  f.r_star = root * root;
  f.upper = 2.0 * (b * b + c);
  return f;
}

BoundValue constrained_excess_bound(double n, double p_hat, std::size_t d, double D, double mu,
                                   double sigma_max_sq, double sigma_min_sq, double A, double delta,
                                   const ConstantTable& consts) {
  require(n >= 1.0, "n must be at least 1");
  check_prob(p_hat, "p_hat must lie in (0,1)");
  require(d >= 1, "dimension must be at least 1");
  require(A >= 1.0, "A must be at least 1");
  check_prob(delta, "delta must lie in (0,1)");
  double b = bernstein_constant_linear(D, mu, sigma_max_sq, sigma_min_sq);
  double arg = 30.0 * A * std::sqrt(n) / delta;
  BoundValue v;
  v.small_log_argument = arg < kE;
  v.value = consts.c1 * (static_cast<double>(d) + 1.0) * b * std::log(arg) / (n * p_hat * (1.0 - p_hat));
  return v;
}

}  // namespace balrisk
