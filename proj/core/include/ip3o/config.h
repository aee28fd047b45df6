#ifndef IP3O_CONFIG_H_
#define IP3O_CONFIG_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ip3o/envs.h"
#include "ip3o/trainer.h"

namespace ip3o {

struct EnvSpec {
  std::string kind = "pondworld";  // "pondworld" or "point_mass"
  PondWorldConfig pondworld;
  PointMassConfig point_mass;

  std::unique_ptr<Env> make() const;
};

struct OracleConfig {
  // Budget for the oracle check; falls back to trainer.cost_limits[0].
  std::optional<double> budget;
  std::vector<double> eta_factors = {0.5, 1.0, 2.0, 10.0};
  double alpha = 1e-3;
  std::optional<double> h;
  // Infeasible budgets fail the check when strict.
  bool strict = true;
  int max_iters = 50000;
};

struct SweepAxis {
  std::string path;  // dotted path into the config, e.g. "trainer.alpha"
  std::vector<nlohmann::json> values;
};

struct SweepConfig {
  std::vector<SweepAxis> axes;
  std::vector<std::uint64_t> seeds;
  int workers = 1;
};

struct ExperimentConfig {
  TrainerConfig trainer;
  EnvSpec env;
  std::string output_dir = "runs/default";
  // Write a checkpoint every K epochs (0: only initial and final).
  int checkpoint_interval = 0;
  int eval_episodes = 10;
  OracleConfig oracle;
  SweepConfig sweep;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Strict parsing: unknown keys and wrong types raise ConfigError with the
// dotted field path; syntax errors report line and column.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Full serialisation, every field present.
nlohmann::json to_json(const ExperimentConfig& cfg);

// Replaces the value at a dotted path, creating intermediate objects.
void set_path(nlohmann::json& j, const std::string& path, const nlohmann::json& value);

}  // namespace ip3o

#endif  // IP3O_CONFIG_H_
