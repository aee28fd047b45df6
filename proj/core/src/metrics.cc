#include "ip3o/metrics.h"

#include <cstdio>
#include <sstream>

#include "ip3o/errors.h"

namespace ip3o {
namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ShapeError("bad number '" + s + "' in metrics");
    return v;
  } catch (const std::logic_error&) {
    // stod reports "nan"/"inf" fine; anything else is malformed.
    throw ShapeError("bad number '" + s + "' in metrics");
  }
}

}  // namespace

std::vector<std::string> metrics_header(const MetricsLayout& layout) {
  std::vector<std::string> h = {"epoch", "steps", "return"};
  for (int i = 0; i < layout.n_costs; ++i) h.push_back("cost_" + std::to_string(i));
  h.push_back("violation_rate");
  h.push_back("loss_r");
  for (int i = 0; i < layout.n_costs; ++i) h.push_back("loss_c_" + std::to_string(i));
  h.push_back("loss_total");
  h.push_back("kl");
  if (layout.with_bound) {
    h.push_back("eps_r");
    for (int i = 0; i < layout.n_constraints; ++i) h.push_back("eps_c_" + std::to_string(i));
    h.push_back("delta");
    h.push_back("bound");
  }
  return h;
}

MetricsRow to_row(const EpochMetrics& m, const MetricsLayout& layout) {
  MetricsRow r;
  r.epoch = m.epoch;
  r.steps = m.steps;
  r.mean_return = m.mean_return;
  r.cost = m.cost;
  r.cost.resize(static_cast<std::size_t>(layout.n_costs), 0.0);
  r.violation_rate = m.violation_rate;
  r.loss_r = m.loss_r;
  r.loss_c = m.loss_c;
  r.loss_c.resize(static_cast<std::size_t>(layout.n_costs), 0.0);
  r.loss_total = m.loss_total;
  r.kl = m.kl;
  if (layout.with_bound) {
    r.eps_r = m.eps_r.value_or(0.0);
    r.eps_c = m.eps_c;
    r.eps_c.resize(static_cast<std::size_t>(layout.n_constraints), 0.0);
    r.delta = m.delta.value_or(0.0);
    r.bound = m.bound.value_or(0.0);
  }
  return r;
}

std::string format_row(const MetricsRow& row, const MetricsLayout& layout) {
  std::string s = std::to_string(row.epoch) + "," + std::to_string(row.steps) + "," +
                  num(row.mean_return);
  for (int i = 0; i < layout.n_costs; ++i) s += "," + num(row.cost.at(static_cast<std::size_t>(i)));
  s += "," + num(row.violation_rate) + "," + num(row.loss_r);
  for (int i = 0; i < layout.n_costs; ++i) {
    s += "," + num(row.loss_c.at(static_cast<std::size_t>(i)));
  }
  s += "," + num(row.loss_total) + "," + num(row.kl);
  if (layout.with_bound) {
    s += "," + num(row.eps_r.value_or(0.0));
    for (int i = 0; i < layout.n_constraints; ++i) {
      s += "," + num(row.eps_c.at(static_cast<std::size_t>(i)));
    }
    s += "," + num(row.delta.value_or(0.0)) + "," + num(row.bound.value_or(0.0));
  }
  return s;
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text, MetricsLayout* layout_out) {
  std::stringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ShapeError("metrics file has no header");
  const std::vector<std::string> header = split(line);
  MetricsLayout layout;
  layout.n_costs = 0;
  for (const auto& h : header) {
    if (h.rfind("cost_", 0) == 0) ++layout.n_costs;
    if (h.rfind("eps_c_", 0) == 0) ++layout.n_constraints;
    if (h == "bound") layout.with_bound = true;
  }
  if (header != metrics_header(layout)) throw ShapeError("unexpected metrics header: " + line);
  if (layout_out) *layout_out = layout;

  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != header.size()) throw ShapeError("metrics row has wrong width: " + line);
    std::size_t k = 0;
    MetricsRow r;
    r.epoch = std::stoi(cells[k++]);
    r.steps = std::stoll(cells[k++]);
    r.mean_return = to_double(cells[k++]);
    for (int i = 0; i < layout.n_costs; ++i) r.cost.push_back(to_double(cells[k++]));
    r.violation_rate = to_double(cells[k++]);
    r.loss_r = to_double(cells[k++]);
    for (int i = 0; i < layout.n_costs; ++i) r.loss_c.push_back(to_double(cells[k++]));
    r.loss_total = to_double(cells[k++]);
    r.kl = to_double(cells[k++]);
    if (layout.with_bound) {
      r.eps_r = to_double(cells[k++]);
      for (int i = 0; i < layout.n_constraints; ++i) r.eps_c.push_back(to_double(cells[k++]));
      r.delta = to_double(cells[k++]);
      r.bound = to_double(cells[k++]);
    }
    if (!rows.empty() && r.epoch <= rows.back().epoch) {
      throw ShapeError("metrics epochs must increase");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path, MetricsLayout* layout) {
  std::ifstream in(path);
  if (!in) throw ShapeError("cannot read metrics file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_metrics_csv(ss.str(), layout);
}

MetricsWriter::MetricsWriter(const std::string& path, const MetricsLayout& layout)
    : out_(path, std::ios::binary | std::ios::trunc), layout_(layout) {
  if (!out_) throw std::runtime_error("cannot write metrics file '" + path + "'");
  const auto h = metrics_header(layout_);
  for (std::size_t k = 0; k < h.size(); ++k) out_ << (k ? "," : "") << h[k];
  out_ << '\n';
  out_.flush();
}

void MetricsWriter::write(const MetricsRow& row) {
  out_ << format_row(row, layout_) << '\n';
  out_.flush();
}

std::size_t final_window(std::size_t epochs) {
  if (epochs == 0) return 0;
  return std::max<std::size_t>(1, (epochs + 9) / 10);
}

nlohmann::json summarize(const std::vector<MetricsRow>& rows) {
  const std::size_t w = final_window(rows.size());
  nlohmann::json j;
  j["epochs"] = rows.size();
  j["final_window"] = w;
  j["steps"] = rows.empty() ? 0LL : rows.back().steps;
  if (w == 0) {
    j["final_return"] = nullptr;
    j["final_cost"] = nlohmann::json::array();
    j["final_violation_rate"] = nullptr;
    return j;
  }
  double ret = 0.0, viol = 0.0;
  std::vector<double> cost(rows.back().cost.size(), 0.0);
  for (std::size_t k = rows.size() - w; k < rows.size(); ++k) {
    ret += rows[k].mean_return / static_cast<double>(w);
    viol += rows[k].violation_rate / static_cast<double>(w);
    for (std::size_t i = 0; i < cost.size(); ++i) cost[i] += rows[k].cost[i] / static_cast<double>(w);
  }
  j["final_return"] = ret;
  j["final_cost"] = cost;
  j["final_violation_rate"] = viol;
  return j;
}

}  // namespace ip3o
