#pragma once

#include <cstddef>
#include <cstdint>

namespace balrisk {

// Universal constants of the fast-rate chain.
struct ConstantTable {
  double c_subroot = 0.0;  // C = 12 * int_1^inf s^-2 sqrt(1 + log s) ds
  double c1 = 0.0;         // 108 C^2
  double c_vc = 12.0;      // constant of the VC-class deviation inequality
  double k1 = 0.0;         // 5 c_vc
  double k2 = 0.0;         // 64 c_vc^2

  static ConstantTable compute();
};

// 12 * int_0^inf e^{-t} sqrt(1 + t) dt by adaptive Gauss-Kronrod quadrature.
double compute_subroot_constant();

// value: the bound; valid: the sample-size precondition of the inequality
// holds; small_log_argument: some log argument is below e, where the bound
// is evaluated verbatim but outside its intended regime.
struct BoundValue {
  double value = 0.0;
  bool valid = true;
  bool small_log_argument = false;
};

struct BoundInputs {
  double n = 0.0;
  double p = 0.0;            // class prior, or p_hat
  double q = 0.5;            // weight of the fast-rate deviation
  double v = 1.0;            // VC parameters
  double A = 1.0;
  double U = 1.0;            // envelope
  double sigma_plus = 1.0;   // in (0, U]
  double sigma_minus = 1.0;  // in (0, U]
  double B = 2.0;            // Bernstein constant, >= 2U for the fast rate
  double delta = 0.05;
  double K = 2.0;            // trade-off of the fast-rate inequality, > 1
  double K_slow = 60.0;      // universal constant of the slow-rate inequality

  double sigma_max() const noexcept { return sigma_plus > sigma_minus ? sigma_plus : sigma_minus; }
  double sigma_min() const noexcept { return sigma_plus < sigma_minus ? sigma_plus : sigma_minus; }
};

// K sigma+ sqrt(v/(np) log(K A U / (delta sigma+ sqrt p))), valid when
// np >= max(U^2/sigma+^2 v log(...), 8 log(1/delta)).
BoundValue slow_rate_bound(const BoundInputs& in, const ConstantTable& consts);

// Excess-risk form: sigma_max in front, sigma_min in the logarithm; needs p <= 1/2.
BoundValue slow_rate_erm_bound(const BoundInputs& in, const ConstantTable& consts);

// c1 B K v log(5 A sqrt(n) / delta) / (2 n q (1-q)).
BoundValue fast_rate_bound(double n, double q, double v, double A, double B, double delta, double K,
                           const ConstantTable& consts);

struct VcParams {
  double v = 1.0;
  double A = 1.0;
  friend bool operator==(const VcParams&, const VcParams&) = default;
};

// VC parameters of the weighted excess-loss class: (4v + 1, 6A).
VcParams vc_transform(double v, double A);

// B = D^2 sigma_max^2 / (mu sigma_min^2).
double bernstein_constant_linear(double D, double mu, double sigma_max_sq, double sigma_min_sq);

struct ChernoffInterval {
  double lower = 0.0;
  double upper = 0.0;
};

// Multiplicative Chernoff interval for a binomial count with mean mu; each
// side holds with probability at least 1 - delta.
ChernoffInterval chernoff_interval(double mu, double delta);

struct PRatioBound {
  double z_n = 0.0;
  double ratio_bound = 0.0;       // z/(1-z) when z < 1
  double simplified_bound = 0.0;  // 2z when z <= 1/2, else infinity
  bool valid = false;             // z < 1
};

// Bound on p/p_hat - 1 with z_n = sqrt(2 log(1/delta) / (n p)).
PRatioBound p_ratio_bound(double n, double p, double delta);

// Volume of the Euclidean unit ball in R^d.
double unit_ball_volume(std::size_t d);

struct KnnBoundParams {
  double b_x = 1.0;    // density lower bound on the support
  double c = 1.0;      // corner constant in (0, 1]
  std::size_t d = 1;
  double T = 1.0;
  double delta = 0.05;

  double v_d() const { return unit_ball_volume(d); }
};

struct KnnEnvelope {
  double tau_bar = 0.0;
  bool precondition_ok = false;
};

// tau_bar = (2k / (n b_X c V_d))^{1/d}; precondition
// 8 d log(12 n / delta) <= k <= T^d n b_X c V_d / 2.
KnnEnvelope knn_radius_envelope(std::size_t k, std::size_t n, const KnnBoundParams& params);

struct SubrootFixedPoint {
  double r_star = 0.0;
  double upper = 0.0;  // 2 (b^2 + c)
};

// Fixed point of psi(r) = b sqrt(r) + c.
SubrootFixedPoint subroot_fixed_point(double b, double c);

// c1 (d+1) D^2 sigma_max^2 / (mu sigma_min^2) log(30 A sqrt(n)/delta) / (n p_hat (1 - p_hat)).
BoundValue constrained_excess_bound(double n, double p_hat, std::size_t d, double D, double mu,
                                   double sigma_max_sq, double sigma_min_sq, double A, double delta,
                                   const ConstantTable& consts);

}  // namespace balrisk
