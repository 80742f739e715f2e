#include "balrisk/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "balrisk/data.hpp"
#include "balrisk/error.hpp"
#include "balrisk/knn.hpp"
#include "balrisk/measures.hpp"
#include "balrisk/numeric.hpp"
#include "balrisk/parallel.hpp"
#include "balrisk/random.hpp"

namespace balrisk {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_grid(const std::vector<double>& grid, const char* name) {
  if (grid.empty()) throw UsageError(std::string(name) + " must not be empty");
  for (double g : grid) {
    if (!(g >= 0.25 && g <= 0.75)) throw UsageError(std::string(name) + " values must lie in [0.25, 0.75]");
  }
}

struct Summary {
  double mean = kNaN;
  double q10 = kNaN;
  double q90 = kNaN;
};

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  s.mean = mean(values);
  s.q10 = quantile_type7(values, 0.1);
  s.q90 = quantile_type7(values, 0.9);
  return s;
}

// Training draw conditioned on both classes being present; nullopt after
// max_redraws failed attempts.
std::optional<LabeledDataset> draw_nondegenerate(const StudentMixture& mix, std::size_t n, std::size_t max_redraws,
                                                 std::uint64_t seed, std::size_t& redraws) {
  for (std::size_t attempt = 0; attempt <= max_redraws; ++attempt) {
    LabeledDataset train = mix.draw_labeled(n, derive_seed(seed, {attempt}));
    std::size_t pos = train.count_positive();
    if (pos > 0 && pos < n) return train;
    ++redraws;
  }
  return std::nullopt;
}

}  // namespace

void HeatmapConfig::validate() const {
  if (n < 2) throw UsageError("n must be at least 2");
  check_grid(a_grid, "a grid");
  check_grid(b_grid, "b grid");
  if (reps < 1) throw UsageError("reps must be at least 1");
  if (test_queries < 1) throw UsageError("test_queries must be at least 1");
}

ResultTable run_knn_heatmap(const HeatmapConfig& cfg) {
  cfg.validate();
  const std::size_t na = cfg.a_grid.size(), nb = cfg.b_grid.size();
  const std::size_t tasks = na * nb * cfg.reps;
  const double n = static_cast<double>(cfg.n);
  std::vector<double> risk(tasks, kNaN);
  std::vector<std::size_t> redraws(tasks, 0);

  parallel_for(tasks, [&](std::size_t t) {
    std::size_t rep = t % cfg.reps;
    std::size_t cell = t / cfg.reps;
    std::size_t ai = cell / nb, bi = cell % nb;
    double p = std::pow(n, -cfg.a_grid[ai]);
    auto k = static_cast<std::size_t>(std::llround(std::pow(n, cfg.b_grid[bi])));
    k = std::clamp<std::size_t>(k, 1, cfg.n);
    StudentMixture mix(StudentMixtureParams::reference(p));
    auto train = draw_nondegenerate(mix, cfg.n, cfg.max_redraws,
                                    derive_seed(cfg.seed, {stream::train, ai, bi, rep}), redraws[t]);
    if (!train) return;
    KnnModel model(std::move(*train), k);
    ClassSplitSample test = mix.draw_split(cfg.test_queries, derive_seed(cfg.seed, {stream::test, ai, bi, rep}));
    auto pos = model.classify_batch(test.positive);
    auto neg = model.classify_batch(test.negative);
    double err_pos = static_cast<double>(std::count(pos.begin(), pos.end(), Label::negative)) /
                     static_cast<double>(pos.size());
    double err_neg = static_cast<double>(std::count(neg.begin(), neg.end(), Label::positive)) /
                     static_cast<double>(neg.size());
    risk[t] = 0.5 * (err_pos + err_neg);
  });

  ResultTable table({"a", "b", "n", "k", "p", "kp", "n_pow_b_minus_a", "reps", "valid_reps", "redraws",
                     "am_risk_mean", "am_risk_q10", "am_risk_q90", "valid"});
  for (std::size_t ai = 0; ai < na; ++ai) {
    for (std::size_t bi = 0; bi < nb; ++bi) {
      std::size_t cell = ai * nb + bi;
      std::vector<double> vals;
      std::size_t total_redraws = 0;
      for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
        std::size_t t = cell * cfg.reps + rep;
        total_redraws += redraws[t];
        if (!std::isnan(risk[t])) vals.push_back(risk[t]);
      }
      double a = cfg.a_grid[ai], b = cfg.b_grid[bi];
      double p = std::pow(n, -a);
      auto k = std::clamp<std::int64_t>(std::llround(std::pow(n, b)), 1, static_cast<std::int64_t>(cfg.n));
      Summary s = summarize(vals);
      bool valid = vals.size() == cfg.reps;
      table.add_row({a, b, static_cast<std::int64_t>(cfg.n), k, p, static_cast<double>(k) * p, std::pow(n, b - a),
                     static_cast<std::int64_t>(cfg.reps), static_cast<std::int64_t>(vals.size()),
                     static_cast<std::int64_t>(total_redraws), s.mean, s.q10, s.q90,
                     std::string(valid ? "true" : "false")});
    }
  }
  return table;
}

void ExcessRiskConfig::validate() const {
  if (n_grid.empty()) throw UsageError("n grid must not be empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 2) throw UsageError("every n must be at least 2");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw UsageError("n grid must be increasing");
  }
  if (!(a > 0.0 && a < 1.0)) throw UsageError("a must lie in (0,1)");
  if (!(u > 0.0)) throw UsageError("u must be positive");
  if (oracle_draws < 2 || risk_draws < 2) throw UsageError("draw counts must be at least 2");
  if (reps < 1) throw UsageError("reps must be at least 1");
  make_loss(loss);
  if (risk_eval != "monte-carlo" && risk_eval != "exact" && risk_eval != "auto") {
    throw UsageError("risk_eval must be auto, exact or monte-carlo");
  }
  if (risk_eval == "exact" && loss != "logistic") throw UsageError("exact risk evaluation supports the logistic loss only");
}

ResultTable run_erm_excess_curve(const ExcessRiskConfig& cfg) {
  cfg.validate();
  const LossSpec loss = make_loss(cfg.loss);
  const std::size_t nn = cfg.n_grid.size();
  const bool exact = cfg.risk_eval == "exact" || (cfg.risk_eval == "auto" && cfg.loss == "logistic");

  struct Reference {
    FitResult oracle;
    ClassSplitSample sample;
    MonteCarloEstimate risk;
  };
  std::vector<Reference> refs;
  refs.reserve(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    double p = std::pow(static_cast<double>(cfg.n_grid[i]), -cfg.a);
    StudentMixture mix(StudentMixtureParams::reference(p));
    FitResult oracle = estimate_oracle_score(mix, loss, cfg.u, p, cfg.oracle_draws,
                                             derive_seed(cfg.seed, {stream::oracle, i}));
    ClassSplitSample sample;
    MonteCarloEstimate risk;
    if (exact) {
      risk.value = logistic_balanced_risk(mix, oracle.score.beta());
    } else {
      sample = mix.draw_split(cfg.risk_draws, derive_seed(cfg.seed, {stream::risk, i}));
      risk = weighted_risk_on(sample, oracle.score, loss);
    }
    refs.push_back({std::move(oracle), std::move(sample), risk});
  }

  const std::size_t tasks = nn * cfg.reps;
  std::vector<double> raw(tasks, kNaN), se(tasks, kNaN);
  std::vector<std::size_t> redraws(tasks, 0);
  std::vector<char> converged(tasks, 0);
  parallel_for(tasks, [&](std::size_t t) {
    std::size_t i = t / cfg.reps, rep = t % cfg.reps;
    double p = std::pow(static_cast<double>(cfg.n_grid[i]), -cfg.a);
    StudentMixture mix(StudentMixtureParams::reference(p));
    auto train = draw_nondegenerate(mix, cfg.n_grid[i], cfg.max_redraws,
                                    derive_seed(cfg.seed, {stream::train, i, rep}), redraws[t]);
    if (!train) return;
    FitResult fit = fit_constrained_balanced_erm(*train, loss, cfg.u, Weighting::balanced());
    converged[t] = fit.converged ? 1 : 0;
    MonteCarloEstimate d;
    if (exact) {
      d.value = logistic_balanced_risk(mix, fit.score.beta()) - refs[i].risk.value;
    } else {
      d = paired_risk_difference(refs[i].sample, fit.score, refs[i].oracle.score, loss);
    }
    raw[t] = d.value;
    se[t] = d.std_error;
  });

  ResultTable table({"n", "a", "p", "np", "reps", "valid_reps", "redraws", "nonconverged", "excess_mean",
                     "excess_q10", "excess_q90", "raw_excess_mean", "mean_std_error", "frac_raw_above_minus_3se",
                     "oracle_risk", "oracle_risk_std_error", "oracle_converged", "valid"});
  for (std::size_t i = 0; i < nn; ++i) {
    std::vector<double> clamped, raws, ses;
    std::size_t total_redraws = 0, nonconv = 0, above = 0;
    for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
      std::size_t t = i * cfg.reps + rep;
      total_redraws += redraws[t];
      if (std::isnan(raw[t])) continue;
      if (!converged[t]) ++nonconv;
      raws.push_back(raw[t]);
      ses.push_back(se[t]);
      clamped.push_back(std::max(raw[t], 0.0));
      if (raw[t] >= -3.0 * se[t]) ++above;
    }
    double n = static_cast<double>(cfg.n_grid[i]);
    double p = std::pow(n, -cfg.a);
    Summary s = summarize(clamped);
    double frac = raws.empty() ? kNaN : static_cast<double>(above) / static_cast<double>(raws.size());
    bool valid = raws.size() == cfg.reps;
    table.add_row({static_cast<std::int64_t>(cfg.n_grid[i]), cfg.a, p, n * p, static_cast<std::int64_t>(cfg.reps),
                   static_cast<std::int64_t>(raws.size()), static_cast<std::int64_t>(total_redraws),
                   static_cast<std::int64_t>(nonconv), s.mean, s.q10, s.q90, raws.empty() ? kNaN : mean(raws),
                   ses.empty() ? kNaN : mean(ses), frac, refs[i].risk.value, refs[i].risk.std_error,
                   std::string(refs[i].oracle.converged ? "true" : "false"), std::string(valid ? "true" : "false")});
  }
  return table;
}

double excess_curve_slope(const ResultTable& curve) {
  std::vector<double> x, y;
  for (std::size_t r = 0; r < curve.size(); ++r) {
    double e = curve.number(r, "excess_mean");
    if (!(e > 0.0)) throw DomainError("excess curve has a nonpositive mean; log-log slope undefined");
    x.push_back(std::log(curve.number(r, "np")));
    y.push_back(std::log(e));
  }
  if (x.size() < 2) throw DomainError("slope needs at least two points");
  return ols_slope(x, y);
}

ResultTable run_bound_report(const std::vector<BoundInputs>& inputs, const ConstantTable& consts) {
  ResultTable table({"bound", "n", "p", "q", "v", "A", "U", "sigma_plus", "sigma_minus", "B", "delta", "K",
                     "K_slow", "value", "valid", "small_log_argument", "note"});
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  for (const BoundInputs& in : inputs) {
    auto emit = [&](const std::string& name, double value, bool valid, bool small_log, std::string note) {
      table.add_row({name, in.n, in.p, in.q, in.v, in.A, in.U, in.sigma_plus, in.sigma_minus, in.B, in.delta,
                     in.K, in.K_slow, value, flag(valid), flag(small_log), std::move(note)});
    };
    auto guarded = [&](const std::string& name, auto&& eval) -> std::optional<BoundValue> {
      try {
        BoundValue v = eval();
        emit(name, v.value, v.valid, v.small_log_argument, "");
        return v;
      } catch (const DomainError& e) {
        emit(name, kNaN, false, false, e.what());
        return std::nullopt;
      }
    };

    auto slow = guarded("slow_rate", [&] { return slow_rate_bound(in, consts); });
    guarded("slow_rate_erm", [&] { return slow_rate_erm_bound(in, consts); });
    auto fast = guarded("fast_rate", [&] {
      BoundValue v = fast_rate_bound(in.n, in.q, in.v, in.A, in.B, in.delta, in.K, consts);
      v.valid = in.U > 0.0 && in.B >= 2.0 * in.U;
      return v;
    });
    if (slow && fast) {
      emit("fast_slow_ratio", fast->value / slow->value, slow->valid && fast->valid,
           slow->small_log_argument || fast->small_log_argument, "");
    } else {
      emit("fast_slow_ratio", kNaN, false, false, "a component bound is undefined");
    }
    try {
      PRatioBound r = p_ratio_bound(in.n, in.p, in.delta);
      emit("p_ratio", r.ratio_bound, r.valid, false, "");
    } catch (const DomainError& e) {
      emit("p_ratio", kNaN, false, false, e.what());
    }
    try {
      ChernoffInterval c = chernoff_interval(in.n * in.p, in.delta);
      emit("chernoff_lower", c.lower, true, false, "");
      emit("chernoff_upper", c.upper, true, false, "");
    } catch (const DomainError& e) {
      emit("chernoff_lower", kNaN, false, false, e.what());
      emit("chernoff_upper", kNaN, false, false, e.what());
    }
  }
  return table;
}

}  // namespace balrisk
