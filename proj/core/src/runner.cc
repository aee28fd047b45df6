#include "ip3o/runner.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "ip3o/checkpoint.h"
#include "ip3o/errors.h"
#include "ip3o/metrics.h"
#include "ip3o/oracle.h"
#include "ip3o/svg.h"

namespace ip3o {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void say(std::ostream* s, const std::string& line) {
  if (s) *s << line << '\n' << std::flush;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

// Loads and applies overrides; nullopt after reporting on a config error.
std::optional<ExperimentConfig> load(const std::string& path, const RunOptions& opts) {
  try {
    return load_config(path);
  } catch (const std::exception& e) {
    say(opts.err, std::string("config error: ") + e.what());
    return std::nullopt;
  }
}

void apply(ExperimentConfig& cfg, const RunOptions& opts) {
  if (opts.seed) cfg.trainer.seed = *opts.seed;
  if (opts.out) cfg.output_dir = *opts.out;
}

std::string header_line(const std::string& cmd, const ExperimentConfig& cfg) {
  return cmd + ": " + std::string(to_string(cfg.trainer.algo)) + " on " + cfg.env.kind +
         ", seed " + std::to_string(cfg.trainer.seed) + " -> " + cfg.output_dir;
}

void save_agent(const fs::path& path, const AgentParams& agent, int epoch) {
  Checkpoint ckpt = to_checkpoint(agent);
  ckpt.header["epoch"] = epoch;
  save_checkpoint(path, ckpt);
}

std::string checkpoint_name(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "epoch_%06d.ckpt", epoch);
  return buf;
}

}  // namespace

int run_train(const std::string& config_path, const RunOptions& opts) {
  auto cfg = load(config_path, opts);
  if (!cfg) return kExitValidation;
  return run_train(std::move(*cfg), opts);
}

int run_train(ExperimentConfig cfg, const RunOptions& opts) {
  apply(cfg, opts);
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    say(opts.err, std::string("config error: ") + e.what());
    return kExitValidation;
  }
  const fs::path dir(cfg.output_dir);
  say(opts.log, header_line("train", cfg));

  std::vector<MetricsRow> rows;
  MetricsLayout layout;
  std::string error;
  try {
    fs::create_directories(dir);
    write_json(dir / "config.json", to_json(cfg));
    Trainer trainer(cfg.trainer, cfg.env.make());
    layout.n_costs = trainer.env().num_costs();
    layout.n_constraints = cfg.trainer.num_constraints();
    layout.with_bound = cfg.trainer.h.has_value();
    MetricsWriter writer((dir / "metrics.csv").string(), layout);
    save_agent(dir / "initial.ckpt", trainer.agent(), 0);
    trainer.train([&](const EpochMetrics& m) {
      rows.push_back(to_row(m, layout));
      writer.write(rows.back());
      const int done = m.epoch + 1;
      if (cfg.checkpoint_interval > 0 && done % cfg.checkpoint_interval == 0) {
        save_agent(dir / checkpoint_name(done), trainer.agent(), done);
      }
      std::string line = "epoch " + std::to_string(m.epoch) + " return " + num(m.mean_return);
      for (double c : m.cost) line += " cost " + num(c);
      line += " kl " + num(m.kl);
      say(opts.log, line);
    });
    save_agent(dir / "final.ckpt", trainer.agent(), trainer.epoch());
  } catch (const std::exception& e) {
    error = e.what();
    say(opts.err, "run failed: " + error);
  }

  try {
    json summary = summarize(rows);
    summary["algo"] = to_string(cfg.trainer.algo);
    summary["env"] = cfg.env.kind;
    summary["seed"] = cfg.trainer.seed;
    summary["cost_limits"] = cfg.trainer.cost_limits;
    summary["status"] = error.empty() ? "ok" : "failed";
    if (!error.empty()) summary["error"] = error;
    if (fs::exists(dir / "metrics.csv")) write_curves(dir.string(), cfg.trainer.cost_limits);
    write_json(dir / "summary.json", summary);
  } catch (const std::exception& e) {
    say(opts.err, std::string("could not write summary: ") + e.what());
    return kExitRuntime;
  }
  return error.empty() ? kExitOk : kExitRuntime;
}

int run_evaluate(const std::string& config_path, std::optional<std::string> checkpoint,
                 std::optional<int> episodes, const RunOptions& opts) {
  auto cfg = load(config_path, opts);
  if (!cfg) return kExitValidation;
  return run_evaluate(std::move(*cfg), std::move(checkpoint), episodes, opts);
}

int run_evaluate(ExperimentConfig cfg, std::optional<std::string> checkpoint,
                 std::optional<int> episodes, const RunOptions& opts) {
  apply(cfg, opts);
  const int n = episodes.value_or(cfg.eval_episodes);
  if (n < 1) {
    say(opts.err, "config error: episodes must be >= 1");
    return kExitValidation;
  }
  const fs::path dir(cfg.output_dir);
  const fs::path ckpt_path = checkpoint ? fs::path(*checkpoint) : dir / "final.ckpt";
  std::unique_ptr<Env> env = cfg.env.make();
  AgentParams agent = make_agent(cfg.trainer, *env);
  try {
    load_into(load_checkpoint(ckpt_path), agent);
  } catch (const ShapeError& e) {
    say(opts.err, "incompatible checkpoint '" + ckpt_path.string() + "': " + e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    say(opts.err, "cannot load checkpoint '" + ckpt_path.string() + "': " + e.what());
    return kExitValidation;
  }
  try {
    const EvaluationResult r =
        evaluate(agent.policy, *env, n, cfg.trainer.seed, cfg.trainer.cost_limits);
    json j = {{"checkpoint", ckpt_path.string()},
              {"episodes", r.episodes},
              {"seed", cfg.trainer.seed},
              {"mean_return", r.mean_return},
              {"mean_cost", r.mean_cost},
              {"violation_rate", r.violation_rate}};
    std::string line = "evaluate: " + std::to_string(r.episodes) + " episodes, return " +
                       num(r.mean_return);
    for (double c : r.mean_cost) line += ", cost " + num(c);
    line += ", violation rate " + num(r.violation_rate);
    say(opts.log, line);
    fs::create_directories(dir);
    write_json(dir / "evaluation.json", j);
  } catch (const std::exception& e) {
    say(opts.err, std::string("evaluation failed: ") + e.what());
    return kExitRuntime;
  }
  return kExitOk;
}

int run_oracle_check(const std::string& config_path, const RunOptions& opts) {
  auto cfg = load(config_path, opts);
  if (!cfg) return kExitValidation;
  return run_oracle_check(std::move(*cfg), opts);
}

int run_oracle_check(ExperimentConfig cfg, const RunOptions& opts) {
  apply(cfg, opts);
  std::optional<double> budget = cfg.oracle.budget;
  if (!budget && !cfg.trainer.cost_limits.empty()) budget = cfg.trainer.cost_limits[0];
  if (!budget) {
    say(opts.err, "config error: oracle.budget: no budget (set oracle.budget or "
                  "trainer.cost_limits)");
    return kExitValidation;
  }
  TabularCmdp cmdp;
  try {
    cmdp = cfg.env.make()->as_tabular(cfg.trainer.gamma);
  } catch (const UnsupportedError& e) {
    say(opts.err, std::string("unsupported: ") + e.what());
    return kExitValidation;
  }
  say(opts.log, "oracle-check: " + cfg.env.kind + ", d = " + num(*budget));
  try {
    SurrogateOptions so;
    so.max_iters = cfg.oracle.max_iters;
    const ExactPenaltyReport report = verify_exact_penalty(
        cmdp, *budget, cfg.oracle.eta_factors, cfg.oracle.alpha, cfg.oracle.h, so);
    json j = to_json(report);
    j["env"] = cfg.env.kind;
    j["gamma"] = cfg.trainer.gamma;
    j["budget"] = *budget;
    j["alpha"] = cfg.oracle.alpha;
    j["h"] = cfg.oracle.h ? json(*cfg.oracle.h) : json();
    j["strict"] = cfg.oracle.strict;
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    write_json(dir / "oracle_report.json", j);
    if (!report.applicable) {
      say(opts.log, "budget is infeasible: not applicable");
      return cfg.oracle.strict ? kExitOracle : kExitOk;
    }
    say(opts.log, "lambda* = " + json(report.solution.lambda_star).dump() +
                      ", J_R* = " + num(report.solution.j_r_star));
    for (const auto& e : report.entries) {
      say(opts.log, "  eta " + num(e.eta) + ": J_R " + num(e.j_r) + " J_C " + num(e.j_c) +
                        (e.required ? (e.pass ? "  PASS" : "  FAIL") : "  (not required)"));
    }
    return report.pass ? kExitOk : kExitOracle;
  } catch (const std::exception& e) {
    say(opts.err, std::string("oracle check failed: ") + e.what());
    return kExitRuntime;
  }
}

std::string sweep_run_name(std::size_t index, const json& point, std::uint64_t seed) {
  char prefix[16];
  std::snprintf(prefix, sizeof(prefix), "%03zu", index);
  std::string name = prefix;
  for (const auto& [path, value] : point.items()) {
    const auto dot = path.rfind('.');
    name += "_" + (dot == std::string::npos ? path : path.substr(dot + 1)) + "=" +
            (value.is_string() ? value.get<std::string>() : value.dump());
  }
  name += "_seed=" + std::to_string(seed);
  for (char& c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '=' ||
                    c == '.' || c == '-';
    if (!ok) c = '-';
  }
  return name;
}

int run_sweep(const std::string& config_path, const RunOptions& opts) {
  auto cfg = load(config_path, opts);
  if (!cfg) return kExitValidation;
  return run_sweep(std::move(*cfg), opts);
}

int run_sweep(ExperimentConfig cfg, const RunOptions& opts) {
  if (opts.out) cfg.output_dir = *opts.out;
  if (opts.seed) cfg.sweep.seeds = {*opts.seed};
  if (cfg.sweep.seeds.empty()) {
    say(opts.err, "config error: sweep.seeds: must not be empty");
    return kExitValidation;
  }

  // Expand the grid; every point is validated before anything runs.
  std::vector<json> points(1, json::object());
  for (const auto& axis : cfg.sweep.axes) {
    std::vector<json> next;
    for (const auto& p : points) {
      for (const auto& v : axis.values) {
        json q = p;
        q[axis.path] = v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  struct Job {
    std::string name;
    json point;
    std::uint64_t seed;
    ExperimentConfig cfg;
  };
  std::vector<Job> jobs;
  const json base = to_json(cfg);
  for (const auto& p : points) {
    for (std::uint64_t seed : cfg.sweep.seeds) {
      json j = base;
      for (const auto& [path, value] : p.items()) set_path(j, path, value);
      set_path(j, "trainer.seed", seed);
      Job job{sweep_run_name(jobs.size(), p, seed), p, seed, {}};
      try {
        job.cfg = parse_config(j);
      } catch (const std::exception& e) {
        say(opts.err, "config error in sweep point " + job.name + ": " + e.what());
        return kExitValidation;
      }
      job.cfg.output_dir = (fs::path(cfg.output_dir) / job.name).string();
      jobs.push_back(std::move(job));
    }
  }
  say(opts.log, "sweep: " + std::to_string(jobs.size()) + " runs -> " + cfg.output_dir);

  std::vector<int> codes(jobs.size(), kExitRuntime);
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      RunOptions sub;
      std::ostringstream err;
      sub.err = &err;
      codes[k] = run_train(jobs[k].cfg, sub);
      std::lock_guard<std::mutex> lock(log_mu);
      say(opts.log, "  " + jobs[k].name + (codes[k] == kExitOk ? ": ok" : ": FAILED"));
      if (codes[k] != kExitOk) say(opts.err, jobs[k].name + ": " + err.str());
    }
  };
  const int workers = std::max(1, std::min<int>(cfg.sweep.workers, static_cast<int>(jobs.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Aggregate in job order so the file does not depend on scheduling.
  int n_costs = 0;
  std::vector<json> summaries(jobs.size());
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    std::ifstream in(fs::path(jobs[k].cfg.output_dir) / "summary.json");
    if (in) {
      try {
        summaries[k] = json::parse(in);
        n_costs = std::max<int>(n_costs, static_cast<int>(summaries[k]["final_cost"].size()));
      } catch (const std::exception&) {
        summaries[k] = json();
      }
    }
  }
  bool all_ok = true;
  try {
    fs::create_directories(cfg.output_dir);
    std::ofstream out(fs::path(cfg.output_dir) / "sweep_summary.csv",
                      std::ios::binary | std::ios::trunc);
    out << "run";
    for (const auto& axis : cfg.sweep.axes) out << ',' << axis.path;
    out << ",seed,status,final_return";
    for (int i = 0; i < n_costs; ++i) out << ",final_cost_" << i;
    out << ",final_violation_rate\n";
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      const bool ok = codes[k] == kExitOk;
      all_ok = all_ok && ok;
      out << jobs[k].name;
      for (const auto& axis : cfg.sweep.axes) {
        const json& v = jobs[k].point.at(axis.path);
        out << ',' << (v.is_string() ? v.get<std::string>() : v.dump());
      }
      out << ',' << jobs[k].seed << ',' << (ok ? "ok" : "failed");
      const json& s = summaries[k];
      auto cell = [&](const json& v) {
        out << ',';
        if (v.is_number()) out << num(v.get<double>());
      };
      cell(s.is_object() ? s.value("final_return", json()) : json());
      for (int i = 0; i < n_costs; ++i) {
        const bool has = s.is_object() && s.contains("final_cost") &&
                         static_cast<int>(s["final_cost"].size()) > i;
        cell(has ? s["final_cost"][static_cast<std::size_t>(i)] : json());
      }
      cell(s.is_object() ? s.value("final_violation_rate", json()) : json());
      out << '\n';
    }
  } catch (const std::exception& e) {
    say(opts.err, std::string("could not write sweep summary: ") + e.what());
    return kExitRuntime;
  }
  return all_ok ? kExitOk : kExitRuntime;
}

}  // namespace ip3o
