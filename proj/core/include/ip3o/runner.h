#ifndef IP3O_RUNNER_H_
#define IP3O_RUNNER_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ip3o/config.h"

namespace ip3o {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitRuntime = 2,
  kExitOracle = 3,
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides trainer.seed
  std::optional<std::string> out;     // overrides output_dir
  std::ostream* log = nullptr;        // progress lines; silent when null
  std::ostream* err = nullptr;        // diagnostics; silent when null
};

// Each command loads the config (exit 1 on any parse or validation error),
// applies the overrides and runs. Failures after loading exit 2.
//
// train: metrics.csv, summary.json, config.json, initial.ckpt,
// epoch_NNNNNN.ckpt every checkpoint_interval epochs, final.ckpt, return.svg
// and cost_<i>.svg. Outputs written before a failure are kept.
int run_train(const std::string& config_path, const RunOptions& opts);
int run_train(ExperimentConfig cfg, const RunOptions& opts);

// Deterministic rollouts of a checkpoint; writes evaluation.json. The
// checkpoint defaults to <out>/final.ckpt and episodes to eval_episodes.
int run_evaluate(const std::string& config_path, std::optional<std::string> checkpoint,
                 std::optional<int> episodes, const RunOptions& opts);
int run_evaluate(ExperimentConfig cfg, std::optional<std::string> checkpoint,
                 std::optional<int> episodes, const RunOptions& opts);

// Exact tabular check of the penalty-factor condition; writes
// oracle_report.json. Exit 3 when a required entry fails, or when the budget
// is infeasible and oracle.strict is set.
int run_oracle_check(const std::string& config_path, const RunOptions& opts);
int run_oracle_check(ExperimentConfig cfg, const RunOptions& opts);

// Cross-product of sweep axes and seeds, one training run per point in its
// own subdirectory, plus sweep_summary.csv. A seed override replaces the
// seed list.
int run_sweep(const std::string& config_path, const RunOptions& opts);
int run_sweep(ExperimentConfig cfg, const RunOptions& opts);

// Directory name for one sweep point.
std::string sweep_run_name(std::size_t index, const nlohmann::json& point, std::uint64_t seed);

}  // namespace ip3o

#endif  // IP3O_RUNNER_H_
