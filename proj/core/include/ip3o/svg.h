#ifndef IP3O_SVG_H_
#define IP3O_SVG_H_

#include <optional>
#include <string>
#include <vector>

#include "ip3o/metrics.h"

namespace ip3o {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LineChart {
  std::string title;
  std::string x_label = "epoch";
  std::string y_label;
  std::vector<Series> series;
  // Dashed horizontal reference (cost limit).
  std::optional<double> reference;
  int width = 640;
  int height = 400;
};

// Static SVG document. Non-finite points are skipped.
std::string render_svg(const LineChart& chart);

// Return-vs-epoch chart.
LineChart return_chart(const std::vector<MetricsRow>& rows);
// Cost-vs-epoch chart for cost signal `index`, dashed at `limit` when given.
LineChart cost_chart(const std::vector<MetricsRow>& rows, int index,
                     std::optional<double> limit);

// Rewrites return.svg and cost_<i>.svg in `dir` from `dir`/metrics.csv.
void write_curves(const std::string& dir, const std::vector<double>& cost_limits);

}  // namespace ip3o

#endif  // IP3O_SVG_H_
