// ip3o: train, evaluate, oracle-check and sweep from a JSON experiment config.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ip3o/runner.h"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (JSON)")->required();
  cmd->add_option("--seed", c.seed, "override the master seed");
  cmd->add_option("--out", c.out, "override the output directory");
}

ip3o::RunOptions options(const Common& c) {
  ip3o::RunOptions o;
  o.seed = c.seed;
  o.out = c.out;
  o.log = &std::cout;
  o.err = &std::cerr;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained policy optimisation with CELU penalties"};
  app.require_subcommand(1);

  Common train, eval, oracle, sweep;
  std::optional<std::string> checkpoint;
  std::optional<int> episodes;

  auto* t = app.add_subcommand("train", "train a policy");
  add_common(t, train);
  auto* e = app.add_subcommand("evaluate", "run the deterministic policy of a checkpoint");
  add_common(e, eval);
  e->add_option("--checkpoint", checkpoint, "checkpoint file (default <out>/final.ckpt)");
  e->add_option("--episodes", episodes, "episode count (default eval_episodes)");
  auto* o = app.add_subcommand("oracle-check", "exact tabular penalty-factor check");
  add_common(o, oracle);
  auto* s = app.add_subcommand("sweep", "train over the sweep grid");
  add_common(s, sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : ip3o::kExitValidation;
  }

  if (*t) return ip3o::run_train(train.config, options(train));
  if (*e) return ip3o::run_evaluate(eval.config, checkpoint, episodes, options(eval));
  if (*o) return ip3o::run_oracle_check(oracle.config, options(oracle));
  return ip3o::run_sweep(sweep.config, options(sweep));
}
