#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "balrisk/bounds.hpp"
#include "balrisk/error.hpp"
#include "balrisk/kdtree.hpp"
#include "oracles.hpp"

using namespace balrisk;

namespace {

const ConstantTable& consts() {
  static const ConstantTable t = ConstantTable::compute();
  return t;
}

BoundInputs slow_example() {
  BoundInputs in;
  in.n = 1e6;
  in.p = 1e-2;
  in.delta = 0.1;
  in.K_slow = 60.0;
  return in;
}

// Written out by hand from the displayed formula.
double slow_by_hand(double K, double sigma_front, double sigma_log, double v, double n, double p, double A,
                    double U, double delta) {
  return K * sigma_front * std::sqrt(v / (n * p) * std::log(K * A * U / (delta * sigma_log * std::sqrt(p))));
}

}  // namespace

TEST_CASE("subroot constant against the Riemann sum and the closed form") {
  double c = compute_subroot_constant();
  CHECK(std::abs(c - oracle::subroot_constant_riemann()) < 1e-8);
  CHECK(std::abs(c - 12.0 * oracle::subroot_inner_closed_form()) < 1e-10);
  CHECK(c > 12.0);
  CHECK(c < 18.0);
}

TEST_CASE("constant table") {
  const auto& t = consts();
  CHECK(t.c_subroot == compute_subroot_constant());
  CHECK(t.c1 == 108.0 * t.c_subroot * t.c_subroot);
  CHECK(t.c_vc == 12.0);
  CHECK(t.k1 == 60.0);
  CHECK(t.k2 == 9216.0);
}

TEST_CASE("slow-rate bound: dual evaluation and monotonicity") {
  BoundInputs in = slow_example();
  auto b = slow_rate_bound(in, consts());
  double ref = slow_by_hand(60.0, 1.0, 1.0, 1.0, 1e6, 1e-2, 1.0, 1.0, 0.1);
  CHECK(std::abs(b.value - ref) <= 1e-12 * ref);
  CHECK(b.valid);
  CHECK_FALSE(b.small_log_argument);

  double prev = INFINITY;
  for (double n = 1e3; n <= 1e8; n *= 1.7) {
    in.n = n;
    double v = slow_rate_bound(in, consts()).value;
    CHECK(v < prev);
    prev = v;
  }
  in = slow_example();
  prev = INFINITY;
  for (double p = 1e-4; p < 0.9; p *= 2.0) {
    in.p = p;
    double v = slow_rate_bound(in, consts()).value;
    CHECK(v < prev);
    prev = v;
  }
  in = slow_example();
  in.n = 10.0;
  CHECK_FALSE(slow_rate_bound(in, consts()).valid);
  in.sigma_plus = 2.0;
  CHECK_THROWS_AS(slow_rate_bound(in, consts()), DomainError);
}

TEST_CASE("slow-rate excess bound uses sigma_max in front and sigma_min in the log") {
  BoundInputs in = slow_example();
  in.U = 2.0;
  in.sigma_plus = 0.5;
  in.sigma_minus = 1.5;
  auto b = slow_rate_erm_bound(in, consts());
  double ref = slow_by_hand(60.0, 1.5, 0.5, 1.0, 1e6, 1e-2, 1.0, 2.0, 0.1);
  CHECK(std::abs(b.value - ref) <= 1e-12 * ref);
  double prev = 0.0;
  for (double s : {0.6, 0.9, 1.2, 1.6, 2.0}) {
    in.sigma_minus = s;
    double v = slow_rate_erm_bound(in, consts()).value;
    CHECK(v > prev);
    prev = v;
  }
  in.p = 0.6;
  CHECK_THROWS_AS(slow_rate_erm_bound(in, consts()), DomainError);
}

TEST_CASE("fast-rate bound") {
  const auto& t = consts();
  // exact for weights whose complement is representable
  for (double q : {0.0625, 0.25, 0.375}) {
    CHECK(fast_rate_bound(1e5, q, 5, 6, 3, 0.05, 2, t).value == fast_rate_bound(1e5, 1.0 - q, 5, 6, 3, 0.05, 2, t).value);
  }
  for (double q : {0.01, 0.2, 0.37}) {
    CHECK(fast_rate_bound(1e5, q, 5, 6, 3, 0.05, 2, t).value ==
          doctest::Approx(fast_rate_bound(1e5, 1.0 - q, 5, 6, 3, 0.05, 2, t).value).epsilon(1e-14));
  }
  CHECK(fast_rate_bound(1e5, 0.1, 5, 6, 6, 0.05, 2, t).value == 2.0 * fast_rate_bound(1e5, 0.1, 5, 6, 3, 0.05, 2, t).value);
  for (double n = 1e6; n <= 1e12; n *= 10.0) {
    double r = fast_rate_bound(2 * n, 0.1, 5, 6, 3, 0.05, 2, t).value / fast_rate_bound(n, 0.1, 5, 6, 3, 0.05, 2, t).value;
    CHECK(std::abs(r - 0.5) < 0.025);
  }
  double ref = t.c1 * 3 * 2 * 5 * std::log(5 * 6 * std::sqrt(1e5) / 0.05) / (2 * 1e5 * 0.1 * 0.9);
  CHECK(fast_rate_bound(1e5, 0.1, 5, 6, 3, 0.05, 2, t).value == doctest::Approx(ref).epsilon(1e-13));
  CHECK_THROWS_AS(fast_rate_bound(1e5, 0.1, 5, 6, 3, 0.05, 1.0, t), DomainError);
  CHECK_THROWS_AS(fast_rate_bound(1e5, 0.0, 5, 6, 3, 0.05, 2, t), DomainError);
}

TEST_CASE("VC parameter transform") {
  CHECK(vc_transform(1, 1) == VcParams{5, 6});
  CHECK(vc_transform(2.0 * (2 + 1), 3.0) == VcParams{25, 18});
  for (double v : {1.0, 2.5, 7.0}) CHECK(vc_transform(2 * v, 1).v == 8 * v + 1);
  CHECK_THROWS_AS(vc_transform(0.5, 1), DomainError);
}

TEST_CASE("Bernstein constant of the linear class") {
  CHECK(bernstein_constant_linear(1, 1, 1, 1) == 1.0);
  CHECK(bernstein_constant_linear(2, 1, 1, 1) == 4.0);
  CHECK(bernstein_constant_linear(1, 0.5, 3, 1.5) == 4.0);
  CHECK_THROWS_AS(bernstein_constant_linear(1, 0, 1, 1), DomainError);
}

TEST_CASE("Chernoff interval") {
  auto a = chernoff_interval(100.0, std::exp(-2.0));
  CHECK(a.lower == doctest::Approx(80.0).epsilon(1e-14));
  auto b = chernoff_interval(100.0, std::exp(-3.0));
  CHECK(b.upper == doctest::Approx(130.0).epsilon(1e-14));
  auto c = chernoff_interval(100.0, 1.0 - 1e-15);
  CHECK(c.lower == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(c.upper == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(chernoff_interval(1.0, 0.01).lower == 0.0);
  CHECK_THROWS_AS(chernoff_interval(0.0, 0.1), DomainError);
}

TEST_CASE("Chernoff coverage over binomial simulations") {
  std::mt19937_64 rng(2024);
  std::binomial_distribution<int> binom(10000, 0.01);
  const double delta = 0.025;
  auto ci = chernoff_interval(100.0, delta);
  int covered = 0;
  for (int i = 0; i < 10000; ++i) {
    int s = binom(rng);
    covered += s >= ci.lower && s <= ci.upper;
  }
  CHECK(covered / 10000.0 >= (1.0 - 2.0 * delta) - 0.01);
}

TEST_CASE("p ratio bound") {
  // z = 1/2 when 2 log(1/delta) / (np) = 1/4
  double delta = std::exp(-1.0);
  auto half = p_ratio_bound(80.0, 0.1, delta);
  CHECK(half.z_n == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(half.ratio_bound == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(half.simplified_bound == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(half.valid);
  CHECK(p_ratio_bound(1e12, 0.1, 0.05).ratio_bound < 1e-4);
  auto bad = p_ratio_bound(10, 0.01, 0.05);
  CHECK_FALSE(bad.valid);
  CHECK(std::isinf(bad.ratio_bound));
}

TEST_CASE("p ratio coverage over Bernoulli samples") {
  std::mt19937_64 rng(99);
  std::binomial_distribution<int> binom(10000, 0.01);
  auto r = p_ratio_bound(1e4, 0.01, 0.05);
  int ok = 0;
  for (int i = 0; i < 10000; ++i) {
    double p_hat = binom(rng) / 1e4;
    ok += p_hat > 0.0 && 0.01 / p_hat - 1.0 <= r.ratio_bound;
  }
  CHECK(ok / 10000.0 >= 0.94);
}

TEST_CASE("unit ball volume") {
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi).epsilon(1e-12));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 / 3.0 * std::numbers::pi).epsilon(1e-12));
  for (std::size_t d = 1; d <= 20; ++d) {
    double h = d / 2.0;
    CHECK(unit_ball_volume(d) == doctest::Approx(std::pow(std::numbers::pi, h) / std::tgamma(h + 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("k-NN radius envelope") {
  KnnBoundParams params;
  params.d = 2;
  params.b_x = 2.0 / unit_ball_volume(2);
  params.c = 1.0;
  auto e = knn_radius_envelope(100, 10000, params);
  CHECK(e.tau_bar == doctest::Approx(0.1).epsilon(1e-12));
  for (std::size_t d : {1, 2, 3, 5}) {
    params.d = d;
    params.b_x = 1.0;
    double t1 = knn_radius_envelope(50, 100000, params).tau_bar;
    double t2 = knn_radius_envelope(100, 100000, params).tau_bar;
    CHECK(t2 / t1 == doctest::Approx(std::pow(2.0, 1.0 / d)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(knn_radius_envelope(0, 10, params), DomainError);
}

TEST_CASE("k-NN radius envelope covers the empirical radius on the unit square") {
  const std::size_t n = 20000, k = 250, queries = 500, trials = 200;
  KnnBoundParams params;
  params.d = 2;
  params.b_x = 1.0;
  params.c = 0.25;
  params.T = 1.0;
  params.delta = 0.05;
  auto env = knn_radius_envelope(k, n, params);
  REQUIRE(env.precondition_ok);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u;
  std::size_t covered = 0;
  std::vector<double> pts(2 * n);
  for (std::size_t t = 0; t < trials; ++t) {
    for (auto& v : pts) v = u(rng);
    KdTree tree(pts, 2);
    double sup = 0.0;
    for (std::size_t q = 0; q < queries; ++q) {
      double x[2] = {u(rng), u(rng)};
      sup = std::max(sup, std::sqrt(tree.knn(x, k).back().dist_sq));
    }
    covered += sup <= env.tau_bar;
  }
  CHECK(covered >= 0.95 * trials);
}

TEST_CASE("subroot fixed point") {
  auto a = subroot_fixed_point(0.0, 3.0);
  CHECK(a.r_star == doctest::Approx(3.0));
  CHECK(a.upper == 6.0);
  auto b = subroot_fixed_point(2.0, 0.0);
  CHECK(b.r_star == doctest::Approx(4.0));
  CHECK(b.upper == 8.0);
  auto g = subroot_fixed_point(1.0, 1.0);
  double phi = 0.5 * (1.0 + std::sqrt(5.0));
  CHECK(g.r_star == doctest::Approx(phi * phi).epsilon(1e-15));
  CHECK(g.upper == 4.0);
  CHECK(std::abs(std::sqrt(g.r_star) + 1.0 - g.r_star) <= 1e-10 * g.r_star);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    double bb = u(rng), cc = u(rng);
    auto f = subroot_fixed_point(bb, cc);
    CHECK(std::abs(bb * std::sqrt(f.r_star) + cc - f.r_star) <= 1e-10 * f.r_star);
    CHECK(f.r_star <= f.upper);
  }
  CHECK_THROWS_AS(subroot_fixed_point(0.0, 0.0), DomainError);
}

TEST_CASE("constrained excess bound") {
  const auto& t = consts();
  double n = 1e5, p = 0.05, A = 2.0, delta = 0.01;
  double unit = constrained_excess_bound(n, p, 1, 1, 1, 1, 1, A, delta, t).value;
  CHECK(unit == doctest::Approx(2.0 * t.c1 * std::log(30 * A * std::sqrt(n) / delta) / (n * p * (1 - p))).epsilon(1e-14));

  double b1 = constrained_excess_bound(n, p, 3, 0.8, 0.2, 2.0, 1.0, A, delta, t).value;
  double b10 = constrained_excess_bound(10 * n, p, 3, 0.8, 0.2, 2.0, 1.0, A, delta, t).value;
  double log_ratio = std::log(30 * A * std::sqrt(10 * n) / delta) / std::log(30 * A * std::sqrt(n) / delta);
  CHECK(b10 / b1 == doctest::Approx(log_ratio / 10.0).epsilon(1e-13));

  // Against the general fast rate at v = 2(d+1) mapped through the transform
  // and K = 2; the two differ only by the factor (d+1)/v_tilde.
  for (std::size_t d : {1, 2, 5}) {
    double B = bernstein_constant_linear(0.8, 0.2, 2.0, 1.0);
    auto vt = vc_transform(2.0 * (d + 1.0), A);
    double general = fast_rate_bound(n, p, vt.v, vt.A, B, delta, 2.0, t).value;
    double constrained = constrained_excess_bound(n, p, d, 0.8, 0.2, 2.0, 1.0, A, delta, t).value;
    CHECK(vt.v == 8.0 * d + 9.0);
    CHECK(constrained / general == doctest::Approx((d + 1.0) / vt.v).epsilon(1e-13));
  }
}

TEST_CASE("bounds are finite and nonnegative on in-range inputs") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    BoundInputs in;
    in.n = std::pow(10.0, 1 + 7 * u(rng));
    in.p = 0.001 + 0.498 * u(rng);
    in.v = 1 + 10 * u(rng);
    in.A = 1 + 10 * u(rng);
    in.U = 0.5 + 2 * u(rng);
    in.sigma_plus = in.U * (0.01 + 0.99 * u(rng));
    in.sigma_minus = in.U * (0.01 + 0.99 * u(rng));
    in.delta = 0.001 + 0.5 * u(rng);
    for (auto b : {slow_rate_bound(in, consts()), slow_rate_erm_bound(in, consts()),
                   fast_rate_bound(in.n, in.p, in.v, in.A, 2 * in.U, in.delta, 2.0, consts())}) {
      CHECK(std::isfinite(b.value));
      CHECK(b.value >= 0.0);
    }
  }
}
