// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "balrisk/bounds.hpp"
#include "balrisk/cli.hpp"
#include "balrisk/data.hpp"
#include "balrisk/erm.hpp"
#include "balrisk/experiments.hpp"
#include "balrisk/knn.hpp"
#include "balrisk/measures.hpp"
#include "balrisk/random.hpp"
#include "oracles.hpp"

using namespace balrisk;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s | %s\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  if (code != 0) throw std::runtime_error("command failed (" + std::to_string(code) + "): " + err.str());
  return out.str();
}

std::vector<std::string> with_threads(std::vector<std::string> args, const std::string& t) {
  args.push_back("--threads");
  args.push_back(t);
  return args;
}

const std::vector<std::string> kHeatmap = {"knn-heatmap", "--n", "10000", "--reps", "20", "--seed", "1"};
const std::vector<std::string> kCurveThird = {"erm-curve", "--a", "0.3333333333333333", "--reps", "100", "--seed", "1"};
const std::vector<std::string> kCurveHalf = {"erm-curve", "--a", "0.5", "--reps", "100", "--seed", "1"};

std::string heatmap_csv, curve_third_csv;

void heatmap_frontier() {
  heatmap_csv = run(with_threads(kHeatmap, "1"));
  auto t = ResultTable::parse_csv(heatmap_csv);
  bool pass = t.size() == 25;
  std::string detail;
  for (std::size_t r = 0; r < t.size(); ++r) {
    double ratio = t.number(r, "n_pow_b_minus_a");
    double risk = t.number(r, "am_risk_mean");
    std::string cell = "(a=" + fmt(t.number(r, "a")) + ",b=" + fmt(t.number(r, "b")) + ")=" + fmt(risk, 3);
    if (ratio <= 0.1 + 1e-12) {
      bool ok = risk >= 0.45 && risk <= 0.55;
      pass &= ok;
      detail += (ok ? " low " : " low-OUT ") + cell;
    } else if (ratio >= 50.0 - 1e-9) {
      bool ok = risk <= 0.45;
      pass &= ok;
      detail += (ok ? " high " : " high-OUT ") + cell;
    }
  }
  report(1, pass, "heatmap frontier, AM risk in [0.45,0.55] where n^(b-a)<=0.1 and <=0.45 where >=50", detail);
}

void fast_rate_scaling() {
  curve_third_csv = run(with_threads(kCurveThird, "1"));
  double s3 = excess_curve_slope(ResultTable::parse_csv(curve_third_csv));
  double s2 = excess_curve_slope(ResultTable::parse_csv(run(kCurveHalf)));
  bool pass = s3 >= -1.35 && s3 <= -0.65 && s2 >= -1.35 && s2 <= -0.65;
  report(2, pass, "log-log slope of excess risk against np in [-1.35,-0.65]",
         "a=1/3 slope " + fmt(s3) + ", a=1/2 slope " + fmt(s2));
}

void knn_equivalence() {
  std::mt19937_64 rng(20240601);
  const std::size_t dims[] = {1, 2, 5};
  std::size_t mismatches = 0, oracle_mismatches = 0, queries_total = 0;
  for (int ds = 0; ds < 20; ++ds) {
    std::size_t d = dims[ds % 3];
    bool ties = ds % 2 == 0;
    std::size_t n = 300 + rng() % 1700;
    std::uniform_int_distribution<int> grid(0, 6);
    std::normal_distribution<double> g;
    std::vector<double> pts(n * d);
    std::vector<Label> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) pts[i * d + j] = ties ? grid(rng) : g(rng);
      labels[i] = rng() % 4 == 0 ? Label::positive : Label::negative;
    }
    labels[0] = Label::positive;
    labels[1] = Label::negative;
    LabeledDataset data(d, pts, labels);
    std::size_t k = 1 + rng() % 40;
    KnnModel tree(data, k, SearchMethod::kd_tree);
    KnnModel brute(data, k, SearchMethod::brute_force);
    for (int q = 0; q < 1000; ++q) {
      std::vector<double> x(d);
      for (auto& v : x) v = ties ? grid(rng) : g(rng);
      ++queries_total;
      if (tree.classify(x) != brute.classify(x) || tree.neighbors(x) != brute.neighbors(x)) ++mismatches;
      auto ref = oracle::knn_full_sort(pts, d, x, k);
      auto nb = tree.neighbors(x);
      for (std::size_t i = 0; i < k; ++i)
        if (nb[i].index != ref[i].second) {
          ++oracle_mismatches;
          break;
        }
    }
  }
  report(3, mismatches == 0 && oracle_mismatches == 0, "k-d tree agrees exactly with brute force",
         std::to_string(queries_total) + " queries on 20 datasets, " + std::to_string(mismatches) +
             " classification/neighbor mismatches, " + std::to_string(oracle_mismatches) + " full-sort mismatches");
}

void gradient_check() {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  double worst = 0.0;
  std::size_t instances = 0;
  for (const char* name : {"logistic", "exponential", "squared", "squared_hinge"}) {
    LossSpec loss = make_loss(name);
    for (double q : {0.01, 0.5, 0.99}) {
      for (int i = 0; i < 50; ++i) {
        std::size_t d = 1 + rng() % 5, n = 20 + rng() % 200;
        LabeledDataset data(d);
        std::vector<double> x(d);
        for (std::size_t r = 0; r < n; ++r) {
          Label y = r % 3 == 0 ? Label::positive : Label::negative;
          for (auto& v : x) v = g(rng) + (y == Label::positive ? 0.5 : 0.0);
          data.push_back(x, y);
        }
        std::vector<double> beta(d);
        for (auto& b : beta) b = 0.7 * g(rng);
        auto grad = balanced_risk_gradient(data, LinearScore(beta, 100.0), loss, Weighting::fixed(q));
        auto f = [&](const std::vector<double>& b) {
          return balanced_empirical_risk(data, LinearScore(b, 100.0), loss, Weighting::fixed(q));
        };
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          double fd = oracle::central_difference(f, beta, j, 1e-6);
          num += (grad[j] - fd) * (grad[j] - fd);
          den += fd * fd;
        }
        worst = std::max(worst, std::sqrt(num / std::max(den, 1e-300)));
        ++instances;
      }
    }
  }
  report(4, worst < 1e-5, "analytic gradient against centered finite differences",
         std::to_string(instances) + " instances, worst relative error " + fmt(worst, 3));
}

void identity_check() {
  const double p = 0.05;
  StudentMixture mix(StudentMixtureParams::reference(p));
  BayesOracle oracle{[&mix](std::span<const double> x) { return mix.eta(x); }, p};
  Classifier plus = [](std::span<const double>) { return Label::positive; };
  auto id = excess_am_risk_identity(oracle, plus, mix, 1'000'000, derive_seed(1, {1}));
  auto direct = direct_excess_am_risk(oracle, plus, mix, 1'000'000, derive_seed(1, {2}));
  double se = std::hypot(id.std_error, direct.std_error);
  double gap = std::abs(id.value - direct.value) / se;
  report(5, gap <= 3.0, "excess AM risk identity against the direct risk difference",
         "identity " + fmt(id.value, 6) + " +- " + fmt(id.std_error, 2) + ", direct " + fmt(direct.value, 6) +
             " +- " + fmt(direct.std_error, 2) + ", gap " + fmt(gap, 3) + " SE");
}

void chernoff_coverage() {
  std::mt19937_64 rng(6);
  std::binomial_distribution<int> binom(10000, 0.01);
  auto ci = chernoff_interval(100.0, 0.025);
  int covered = 0;
  for (int i = 0; i < 10000; ++i) {
    int s = binom(rng);
    covered += s >= ci.lower && s <= ci.upper;
  }
  double frac = covered / 10000.0;
  report(6, frac >= 0.94, "two-sided Chernoff interval coverage at delta=0.025 per side",
         "interval [" + fmt(ci.lower) + ", " + fmt(ci.upper) + "], coverage " + fmt(frac));
}

void constant_chain() {
  ConstantTable t = ConstantTable::compute();
  double riemann = oracle::subroot_constant_riemann();
  bool pass = std::abs(t.c_subroot - riemann) < 1e-8;
  pass &= t.c1 == 108.0 * t.c_subroot * t.c_subroot;
  pass &= vc_transform(1, 1) == VcParams{5, 6};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  double worst = 0.0;
  bool bounded = true;
  for (int i = 0; i < 1000; ++i) {
    double b = u(rng), c = u(rng);
    auto f = subroot_fixed_point(b, c);
    worst = std::max(worst, std::abs(b * std::sqrt(f.r_star) + c - f.r_star) / f.r_star);
    bounded &= f.r_star <= 2.0 * (b * b + c);
  }
  pass &= worst <= 1e-10 && bounded;
  report(7, pass, "subroot constant, c1, VC transform and fixed point",
         "C=" + fmt(t.c_subroot, 15) + " vs Riemann " + fmt(riemann, 15) + ", c1=" + fmt(t.c1, 10) +
             ", worst fixed-point residual " + fmt(worst, 3));
}

void bernstein_sanity() {
  const double p = 0.1, radius = 10.0, u = 1.0;
  StudentMixture mix(StudentMixtureParams::reference(p), radius);
  auto rep = bernstein_empirical_check(mix, make_loss("logistic"), u, p, radius, 100, 100000, 100000, 8);
  bool pass = rep.max_ratio <= rep.analytic_b + 3.0 * rep.max_ratio_std_error;
  report(8, pass, "empirical P(h^2)/P(h) against the analytic Bernstein constant",
         "max ratio " + fmt(rep.max_ratio) + " +- " + fmt(rep.max_ratio_std_error, 2) + ", analytic B " +
             fmt(rep.analytic_b) + ", scores evaluated " + std::to_string(rep.evaluated));
}

void determinism() {
  struct Cmd {
    std::vector<std::string> args;
    std::string baseline;
  };
  std::vector<Cmd> cmds = {
      {kHeatmap, heatmap_csv},
      {kCurveThird, curve_third_csv},
      {{"bounds", "--n-grid", "1000,10000,100000", "--p", "0.05"}, ""},
      {{"check-identity", "--draws", "200000"}, ""},
  };
  bool pass = true;
  std::string detail;
  for (auto& c : cmds) {
    if (c.baseline.empty()) c.baseline = run(with_threads(c.args, "1"));
    bool same = true;
    for (std::string t : {"4", "8"}) same &= run(with_threads(c.args, t)) == c.baseline;
    pass &= same;
    detail += " " + c.args[0] + (same ? ":identical" : ":DIFFERENT");
  }
  report(9, pass, "byte-identical CSV for thread counts 1, 4 and 8", detail);
}

}  // namespace

int main() {
  auto start = std::chrono::steady_clock::now();
  auto guarded = [](int id, void (*fn)()) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, false, "raised an exception", e.what());
    }
  };
  guarded(1, heatmap_frontier);
  guarded(2, fast_rate_scaling);
  guarded(3, knn_equivalence);
  guarded(4, gradient_check);
  guarded(5, identity_check);
  guarded(6, chernoff_coverage);
  guarded(7, constant_chain);
  guarded(8, bernstein_sanity);
  guarded(9, determinism);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d criteria failed, %.0f s\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
