#include "ip3o/svg.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

namespace ip3o {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

}  // namespace

std::string render_svg(const LineChart& c) {
  const double left = 70, right = 20, top = 36, bottom = 50;
  const double pw = c.width - left - right;
  const double ph = c.height - top - bottom;
  Range xr, yr;
  for (const auto& s : c.series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  if (c.reference) yr.add(*c.reference);
  xr.finish();
  yr.finish();
  const double pad = 0.05 * (yr.hi - yr.lo);
  yr.lo -= pad;
  yr.hi += pad;
  auto px = [&](double x) { return left + pw * (x - xr.lo) / (xr.hi - xr.lo); };
  auto py = [&](double y) { return top + ph * (1.0 - (y - yr.lo) / (yr.hi - yr.lo)); };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(c.width) +
       "\" height=\"" + std::to_string(c.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
       escape(c.title) + "</text>\n";
  o += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) + "\" height=\"" +
       fmt(ph) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = yr.lo + (yr.hi - yr.lo) * k / 4.0;
    const double xv = xr.lo + (xr.hi - xr.lo) * k / 4.0;
    o += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(py(yv) + 4) +
         "\" text-anchor=\"end\">" + fmt(yv) + "</text>\n";
    o += "<text x=\"" + fmt(px(xv)) + "\" y=\"" + fmt(top + ph + 16) +
         "\" text-anchor=\"middle\">" + fmt(xv) + "</text>\n";
  }
  o += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(c.height - 10.0) +
       "\" text-anchor=\"middle\">" + escape(c.x_label) + "</text>\n";
  o += "<text transform=\"translate(16," + fmt(top + ph / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + escape(c.y_label) + "</text>\n";
  if (c.reference) {
    o += "<line x1=\"" + fmt(left) + "\" x2=\"" + fmt(left + pw) + "\" y1=\"" +
         fmt(py(*c.reference)) + "\" y2=\"" + fmt(py(*c.reference)) +
         "\" stroke=\"#000\" stroke-dasharray=\"6 4\"/>\n";
  }
  for (std::size_t i = 0; i < c.series.size(); ++i) {
    const Series& s = c.series[i];
    std::string pts;
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      pts += fmt(px(s.x[k])) + "," + fmt(py(s.y[k])) + " ";
    }
    const char* color = kPalette[i % std::size(kPalette)];
    o += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
         "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    o += "<text x=\"" + fmt(left + 8) + "\" y=\"" + fmt(top + 14 + 14.0 * static_cast<double>(i)) +
         "\" fill=\"" + color + "\">" + escape(s.label) + "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

LineChart return_chart(const std::vector<MetricsRow>& rows) {
  LineChart c;
  c.title = "Episodic return";
  c.y_label = "return";
  Series s{"return", {}, {}};
  for (const auto& r : rows) {
    s.x.push_back(r.epoch);
    s.y.push_back(r.mean_return);
  }
  c.series.push_back(std::move(s));
  return c;
}

LineChart cost_chart(const std::vector<MetricsRow>& rows, int index,
                     std::optional<double> limit) {
  LineChart c;
  c.title = "Episodic cost " + std::to_string(index);
  c.y_label = "cost";
  c.reference = limit;
  Series s{"cost_" + std::to_string(index), {}, {}};
  for (const auto& r : rows) {
    s.x.push_back(r.epoch);
    s.y.push_back(r.cost.at(static_cast<std::size_t>(index)));
  }
  c.series.push_back(std::move(s));
  return c;
}

void write_curves(const std::string& dir, const std::vector<double>& cost_limits) {
  namespace fs = std::filesystem;
  MetricsLayout layout;
  const auto rows = read_metrics_csv((fs::path(dir) / "metrics.csv").string(), &layout);
  auto put = [&](const std::string& name, const LineChart& chart) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
    out << render_svg(chart);
  };
  put("return.svg", return_chart(rows));
  for (int i = 0; i < layout.n_costs; ++i) {
    std::optional<double> limit;
    if (i < static_cast<int>(cost_limits.size())) limit = cost_limits[static_cast<std::size_t>(i)];
    put("cost_" + std::to_string(i) + ".svg", cost_chart(rows, i, limit));
  }
}

}  // namespace ip3o
