#pragma once

#include <string>

#include "balrisk/table.hpp"

namespace balrisk {

// Heatmap of am_risk_mean over the (b, a) grid of a knn-heatmap table.
std::string heatmap_svg(const ResultTable& heatmap);

// Log-log plot of excess_mean (with the q10-q90 band) against n, and the
// reference curve 1/(np) rescaled to pass through the first point.
std::string excess_curve_svg(const ResultTable& curve);

}  // namespace balrisk
