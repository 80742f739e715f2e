#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "balrisk/bounds.hpp"
#include "balrisk/erm.hpp"
#include "balrisk/table.hpp"

namespace balrisk {

struct HeatmapConfig {
  std::size_t n = 10000;
  std::vector<double> a_grid = {0.25, 0.375, 0.5, 0.625, 0.75};
  std::vector<double> b_grid = {0.25, 0.375, 0.5, 0.625, 0.75};
  std::size_t reps = 20;
  std::uint64_t seed = 1;
  std::size_t test_queries = 2000;  // per class
  std::size_t max_redraws = 100;
  void validate() const;
};

// One row per (a, b) cell: p = n^-a, k = round(n^b), balanced k-NN AM risk on
// class-balanced test draws, averaged over reps.
ResultTable run_knn_heatmap(const HeatmapConfig& cfg);

struct ExcessRiskConfig {
  std::vector<std::size_t> n_grid = {100, 316, 1000, 3162, 10000};
  double a = 1.0 / 3.0;
  double u = 10.0;
  std::string loss = "logistic";
  std::size_t oracle_draws = 100000;
  std::size_t risk_draws = 10000;  // per class
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  std::size_t max_redraws = 100;
  // "exact": quadrature risk of linear logistic scores; "monte-carlo":
  // risk_draws per class; "auto": exact for the logistic loss.
  std::string risk_eval = "auto";
  void validate() const;
};

// One row per n: excess balanced risk of the balanced ERM over the oracle
// score g*_p. Every rep at a given n is scored on the same risk sample as the
// oracle, so the reported excess is a paired difference.
ResultTable run_erm_excess_curve(const ExcessRiskConfig& cfg);

// Least-squares slope of log(y) on log(x) over the rows of an excess curve.
double excess_curve_slope(const ResultTable& curve);

// Bound table for each input set: slow rate, slow-rate ERM, fast rate,
// fast/slow ratio, p/p_hat ratio and the Chernoff interval of np. A bound
// whose inputs are out of range yields valid=false and the error text.
ResultTable run_bound_report(const std::vector<BoundInputs>& inputs, const ConstantTable& consts);

}  // namespace balrisk
