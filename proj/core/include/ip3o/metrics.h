#ifndef IP3O_METRICS_H_
#define IP3O_METRICS_H_

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ip3o/trainer.h"

namespace ip3o {

// One parsed line of metrics.csv.
//   epoch,steps,return,cost_0..,violation_rate,loss_r,loss_c_0..,loss_total,kl
// optionally followed by eps_r,eps_c_0..,delta,bound.
struct MetricsRow {
  int epoch = 0;
  long long steps = 0;
  double mean_return = 0.0;
  std::vector<double> cost;
  double violation_rate = 0.0;
  double loss_r = 0.0;
  std::vector<double> loss_c;
  double loss_total = 0.0;
  double kl = 0.0;
  std::optional<double> eps_r;
  std::vector<double> eps_c;
  std::optional<double> delta;
  std::optional<double> bound;

  bool operator==(const MetricsRow&) const = default;
};

struct MetricsLayout {
  int n_costs = 1;          // environment cost signals
  int n_constraints = 0;    // active limits (bound columns)
  bool with_bound = false;
};

std::vector<std::string> metrics_header(const MetricsLayout& layout);
MetricsRow to_row(const EpochMetrics& m, const MetricsLayout& layout);
std::string format_row(const MetricsRow& row, const MetricsLayout& layout);

// Throws ShapeError on malformed content.
std::vector<MetricsRow> parse_metrics_csv(const std::string& text, MetricsLayout* layout = nullptr);
std::vector<MetricsRow> read_metrics_csv(const std::string& path, MetricsLayout* layout = nullptr);

// Appends rows to a CSV file, flushing after each.
class MetricsWriter {
 public:
  MetricsWriter(const std::string& path, const MetricsLayout& layout);
  void write(const MetricsRow& row);

 private:
  std::ofstream out_;
  MetricsLayout layout_;
};

// Number of trailing epochs used for final statistics: ceil(10%) but at
// least one.
std::size_t final_window(std::size_t epochs);

// Means over the final window: return, per-cost episodic cost, violation rate.
nlohmann::json summarize(const std::vector<MetricsRow>& rows);

}  // namespace ip3o

#endif  // IP3O_METRICS_H_
