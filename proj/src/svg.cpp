#include "balrisk/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <vector>

#include "balrisk/error.hpp"

namespace balrisk {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Blue (low) to red (high) over [0, 1].
std::string color(double t) {
  t = std::clamp(std::isnan(t) ? 0.5 : t, 0.0, 1.0);
  int r = static_cast<int>(std::lround(255 * t));
  int b = static_cast<int>(std::lround(255 * (1 - t)));
  int g = static_cast<int>(std::lround(255 * (1 - std::abs(2 * t - 1)) * 0.8));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string heatmap_svg(const ResultTable& heatmap) {
  std::vector<double> as, bs;
  for (std::size_t r = 0; r < heatmap.size(); ++r) {
    as.push_back(heatmap.number(r, "a"));
    bs.push_back(heatmap.number(r, "b"));
  }
  std::sort(as.begin(), as.end());
  as.erase(std::unique(as.begin(), as.end()), as.end());
  std::sort(bs.begin(), bs.end());
  bs.erase(std::unique(bs.begin(), bs.end()), bs.end());
  if (as.empty()) throw DataError("heatmap table is empty");

  const double cell = 60, left = 70, top = 30;
  const double w = left + cell * static_cast<double>(bs.size()) + 30;
  const double h = top + cell * static_cast<double>(as.size()) + 50;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h) << "\">\n";
  s << "<text x=\"" << num(left) << "\" y=\"18\" font-size=\"12\">mean AM risk (x: b, y: a)</text>\n";
  for (std::size_t r = 0; r < heatmap.size(); ++r) {
    double a = heatmap.number(r, "a"), b = heatmap.number(r, "b");
    double risk = heatmap.number(r, "am_risk_mean");
    auto col = static_cast<double>(std::lower_bound(bs.begin(), bs.end(), b) - bs.begin());
    auto row = static_cast<double>(std::lower_bound(as.begin(), as.end(), a) - as.begin());
    double x = left + col * cell, y = top + row * cell;
    s << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(cell) << "\" height=\""
      << num(cell) << "\" fill=\"" << color(2.0 * risk) << "\"/>\n";
    s << "<text x=\"" << num(x + cell / 2) << "\" y=\"" << num(y + cell / 2 + 4)
      << "\" font-size=\"11\" text-anchor=\"middle\">" << num(risk) << "</text>\n";
  }
  for (std::size_t j = 0; j < bs.size(); ++j) {
    s << "<text x=\"" << num(left + (static_cast<double>(j) + 0.5) * cell) << "\" y=\""
      << num(top + cell * static_cast<double>(as.size()) + 18) << "\" font-size=\"11\" text-anchor=\"middle\">"
      << num(bs[j]) << "</text>\n";
  }
  for (std::size_t i = 0; i < as.size(); ++i) {
    s << "<text x=\"" << num(left - 8) << "\" y=\"" << num(top + (static_cast<double>(i) + 0.5) * cell + 4)
      << "\" font-size=\"11\" text-anchor=\"end\">" << num(as[i]) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string excess_curve_svg(const ResultTable& curve) {
  struct Pt {
    double n, np, mean, q10, q90;
  };
  std::vector<Pt> pts;
  for (std::size_t r = 0; r < curve.size(); ++r) {
    Pt p{curve.number(r, "n"), curve.number(r, "np"), curve.number(r, "excess_mean"),
         curve.number(r, "excess_q10"), curve.number(r, "excess_q90")};
    if (p.mean > 0.0) pts.push_back(p);
  }
  if (pts.empty()) throw DataError("excess curve has no positive points");

  double scale = pts.front().mean * pts.front().np;
  double ylo = HUGE_VAL, yhi = -HUGE_VAL;
  for (const Pt& p : pts) {
    for (double v : {p.mean, p.q10, p.q90, scale / p.np}) {
      if (v > 0.0) {
        ylo = std::min(ylo, std::log10(v));
        yhi = std::max(yhi, std::log10(v));
      }
    }
  }
  double xlo = std::log10(pts.front().n), xhi = std::log10(pts.back().n);
  if (xhi <= xlo) xhi = xlo + 1;
  if (yhi <= ylo) yhi = ylo + 1;

  const double W = 480, H = 320, L = 60, R = 20, T = 20, B = 40;
  auto px = [&](double n) { return L + (std::log10(n) - xlo) / (xhi - xlo) * (W - L - R); };
  auto py = [&](double v) { return T + (yhi - std::log10(std::max(v, 1e-300))) / (yhi - ylo) * (H - T - B); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(W) << "\" height=\"" << num(H) << "\">\n";
  s << "<rect x=\"" << num(L) << "\" y=\"" << num(T) << "\" width=\"" << num(W - L - R) << "\" height=\""
    << num(H - T - B) << "\" fill=\"none\" stroke=\"#888\"/>\n";
  s << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.5\" points=\"";
  for (const Pt& p : pts) s << num(px(p.n)) << ',' << num(py(std::max(p.q90, 1e-300))) << ' ';
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) s << num(px(it->n)) << ',' << num(py(std::max(it->q10, 1e-300))) << ' ';
  s << "\"/>\n<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\" points=\"";
  for (const Pt& p : pts) s << num(px(p.n)) << ',' << num(py(p.mean)) << ' ';
  s << "\"/>\n<polyline fill=\"none\" stroke=\"#fd8d3c\" stroke-width=\"2\" stroke-dasharray=\"6,4\" points=\"";
  for (const Pt& p : pts) s << num(px(p.n)) << ',' << num(py(scale / p.np)) << ' ';
  s << "\"/>\n";
  s << "<text x=\"" << num(L) << "\" y=\"" << num(H - 10) << "\" font-size=\"11\">log10 n: " << num(xlo) << " to "
    << num(xhi) << "; log10 excess: " << num(ylo) << " to " << num(yhi) << "; dashed: 1/np</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace balrisk
