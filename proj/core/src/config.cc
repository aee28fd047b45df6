#include "ip3o/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "ip3o/errors.h"

namespace ip3o {
namespace {

using nlohmann::json;

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Reads fields of one JSON object and remembers which keys were consumed.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_, "expected an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(join(where_, key), "wrong type (" + std::string(e.what()) + ")");
    }
  }

  template <typename T>
  void get_optional(const std::string& key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (j_.at(key).is_null()) {
      out.reset();
      return;
    }
    T v{};
    get(key, v);
    out = v;
  }

  const json* sub(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const std::string& key) const { return join(where_, key); }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(join(where_, key), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Cell parse_cell(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ConfigError(where, "expected [row, col]");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

json cell_json(Cell c) { return json::array({c.first, c.second}); }

void parse_trainer(const json& j, TrainerConfig& t) {
  Reader r(j, "trainer");
  std::string algo = std::string(to_string(t.algo));
  r.get("algo", algo);
  try {
    t.algo = algo_from_string(algo);
  } catch (const ParameterError& e) {
    throw ConfigError("trainer.algo", e.what());
  }
  std::string clip_form = std::string(to_string(t.clip_form));
  r.get("clip_form", clip_form);
  try {
    t.clip_form = clip_form_from_string(clip_form);
  } catch (const ParameterError& e) {
    throw ConfigError("trainer.clip_form", e.what());
  }
  r.get("gamma", t.gamma);
  r.get("gae_lambda", t.gae_lambda);
  r.get("cost_gae_lambda", t.cost_gae_lambda);
  r.get("clip_epsilon", t.clip_epsilon);
  r.get("eta", t.eta);
  r.get("alpha", t.alpha);
  r.get_optional("h", t.h);
  r.get("cost_limits", t.cost_limits);
  r.get("epochs", t.epochs);
  r.get("steps_per_epoch", t.steps_per_epoch);
  r.get("minibatch_size", t.minibatch_size);
  r.get("policy_lr", t.policy_lr);
  r.get("value_lr", t.value_lr);
  r.get("update_epochs", t.update_epochs);
  r.get("value_epochs", t.value_epochs);
  r.get("kl_lower", t.kl_lower);
  r.get("kl_upper", t.kl_upper);
  r.get_optional("grad_clip", t.grad_clip);
  r.get("lagrange_lr", t.lagrange_lr);
  r.get("lagrange_init", t.lagrange_init);
  r.get("ipo_t", t.ipo_t);
  r.get("hidden_sizes", t.hidden_sizes);
  r.get("init_log_std", t.init_log_std);
  r.get("discounted_cost", t.discounted_cost);
  r.get("center_cost_advantages", t.center_cost_advantages);
  r.get("seed", t.seed);
  r.finish();
}

json trainer_json(const TrainerConfig& t) {
  return {{"algo", to_string(t.algo)},
          {"gamma", t.gamma},
          {"gae_lambda", t.gae_lambda},
          {"cost_gae_lambda", t.cost_gae_lambda},
          {"clip_epsilon", t.clip_epsilon},
          {"clip_form", to_string(t.clip_form)},
          {"eta", t.eta},
          {"alpha", t.alpha},
          {"h", t.h ? json(*t.h) : json()},
          {"cost_limits", t.cost_limits},
          {"epochs", t.epochs},
          {"steps_per_epoch", t.steps_per_epoch},
          {"minibatch_size", t.minibatch_size},
          {"policy_lr", t.policy_lr},
          {"value_lr", t.value_lr},
          {"update_epochs", t.update_epochs},
          {"value_epochs", t.value_epochs},
          {"kl_lower", t.kl_lower},
          {"kl_upper", t.kl_upper},
          {"grad_clip", t.grad_clip ? json(*t.grad_clip) : json()},
          {"lagrange_lr", t.lagrange_lr},
          {"lagrange_init", t.lagrange_init},
          {"ipo_t", t.ipo_t},
          {"hidden_sizes", t.hidden_sizes},
          {"init_log_std", t.init_log_std},
          {"discounted_cost", t.discounted_cost},
          {"center_cost_advantages", t.center_cost_advantages},
          {"seed", t.seed}};
}

void parse_env(const json& j, EnvSpec& e) {
  Reader r(j, "env");
  r.get("kind", e.kind);
  if (const json* p = r.sub("pondworld")) {
    Reader pr(*p, "env.pondworld");
    PondWorldConfig& c = e.pondworld;
    std::vector<int> size = {c.rows, c.cols};
    pr.get("size", size);
    if (size.size() != 2) throw ConfigError("env.pondworld.size", "expected [rows, cols]");
    c.rows = size[0];
    c.cols = size[1];
    if (const json* s = pr.sub("start")) c.start = parse_cell(*s, "env.pondworld.start");
    if (const json* g = pr.sub("goal")) c.goal = parse_cell(*g, "env.pondworld.goal");
    if (const json* w = pr.sub("water")) {
      if (!w->is_array()) throw ConfigError("env.pondworld.water", "expected a list of cells");
      c.water.clear();
      for (std::size_t k = 0; k < w->size(); ++k) {
        c.water.push_back(parse_cell((*w)[k], "env.pondworld.water[" + std::to_string(k) + "]"));
      }
    }
    pr.get("slip", c.slip);
    pr.get("step_reward", c.step_reward);
    pr.get("goal_reward", c.goal_reward);
    pr.get("water_cost", c.water_cost);
    pr.get("max_steps", c.max_steps);
    pr.finish();
  }
  if (const json* p = r.sub("point_mass")) {
    Reader pr(*p, "env.point_mass");
    PointMassConfig& c = e.point_mass;
    pr.get("dt", c.dt);
    pr.get("max_accel", c.max_accel);
    pr.get("velocity_limit", c.velocity_limit);
    pr.get("horizon", c.horizon);
    pr.get("reward_scale", c.reward_scale);
    pr.finish();
  }
  r.finish();
}

json env_json(const EnvSpec& e) {
  const PondWorldConfig& p = e.pondworld;
  json water = json::array();
  for (Cell c : p.water) water.push_back(cell_json(c));
  const PointMassConfig& m = e.point_mass;
  return {{"kind", e.kind},
          {"pondworld",
           {{"size", {p.rows, p.cols}},
            {"start", cell_json(p.start)},
            {"goal", cell_json(p.goal)},
            {"water", water},
            {"slip", p.slip},
            {"step_reward", p.step_reward},
            {"goal_reward", p.goal_reward},
            {"water_cost", p.water_cost},
            {"max_steps", p.max_steps}}},
          {"point_mass",
           {{"dt", m.dt},
            {"max_accel", m.max_accel},
            {"velocity_limit", m.velocity_limit},
            {"horizon", m.horizon},
            {"reward_scale", m.reward_scale}}}};
}

void parse_oracle(const json& j, OracleConfig& o) {
  Reader r(j, "oracle");
  r.get_optional("budget", o.budget);
  r.get("eta_factors", o.eta_factors);
  r.get("alpha", o.alpha);
  r.get_optional("h", o.h);
  r.get("strict", o.strict);
  r.get("max_iters", o.max_iters);
  r.finish();
}

void parse_sweep(const json& j, SweepConfig& s) {
  Reader r(j, "sweep");
  if (const json* axes = r.sub("axes")) {
    if (!axes->is_array()) throw ConfigError("sweep.axes", "expected a list");
    s.axes.clear();
    for (std::size_t k = 0; k < axes->size(); ++k) {
      const std::string where = "sweep.axes[" + std::to_string(k) + "]";
      Reader ar((*axes)[k], where);
      SweepAxis axis;
      ar.get("path", axis.path);
      ar.get("values", axis.values);
      ar.finish();
      s.axes.push_back(std::move(axis));
    }
  }
  r.get("seeds", s.seeds);
  r.get("workers", s.workers);
  r.finish();
}

}  // namespace

std::unique_ptr<Env> EnvSpec::make() const {
  if (kind == "pondworld") return std::make_unique<PondWorld>(pondworld);
  if (kind == "point_mass") return std::make_unique<PointMass>(point_mass);
  throw ConfigError("env.kind", "unknown environment '" + kind + "'");
}

void ExperimentConfig::validate() const {
  auto wrap = [](const std::string& where, const auto& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where, e.what());
    }
  };
  wrap("trainer", [&] { trainer.validate(); });
  std::unique_ptr<Env> e;
  wrap("env", [&] { e = env.make(); });
  if (trainer.num_constraints() > e->num_costs()) {
    throw ConfigError("trainer.cost_limits", "more limits than the environment has costs");
  }
  if (checkpoint_interval < 0) throw ConfigError("checkpoint_interval", "must be >= 0");
  if (eval_episodes < 1) throw ConfigError("eval_episodes", "must be >= 1");
  if (oracle.max_iters < 1) throw ConfigError("oracle.max_iters", "must be >= 1");
  if (!(oracle.alpha > 0.0)) throw ConfigError("oracle.alpha", "must be positive");
  if (oracle.h && !(*oracle.h > 0.0 && *oracle.h < oracle.alpha && *oracle.h < 1.0)) {
    throw ConfigError("oracle.h", "must lie in (0, min(alpha, 1))");
  }
  for (double f : oracle.eta_factors) {
    if (!(f >= 0.0)) throw ConfigError("oracle.eta_factors", "factors must be >= 0");
  }
  if (sweep.workers < 1) throw ConfigError("sweep.workers", "must be >= 1");
  for (std::size_t k = 0; k < sweep.axes.size(); ++k) {
    const std::string where = "sweep.axes[" + std::to_string(k) + "]";
    if (sweep.axes[k].path.empty()) throw ConfigError(where + ".path", "must not be empty");
    if (sweep.axes[k].values.empty()) throw ConfigError(where + ".values", "must not be empty");
  }
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  Reader r(j, "");
  if (const json* t = r.sub("trainer")) parse_trainer(*t, cfg.trainer);
  if (const json* e = r.sub("env")) parse_env(*e, cfg.env);
  r.get("output_dir", cfg.output_dir);
  r.get("checkpoint_interval", cfg.checkpoint_interval);
  r.get("eval_episodes", cfg.eval_episodes);
  if (const json* o = r.sub("oracle")) parse_oracle(*o, cfg.oracle);
  if (const json* s = r.sub("sweep")) parse_sweep(*s, cfg.sweep);
  r.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", e.what());
  }
  return parse_config(j);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  json axes = json::array();
  for (const auto& a : cfg.sweep.axes) axes.push_back({{"path", a.path}, {"values", a.values}});
  const OracleConfig& o = cfg.oracle;
  return {{"trainer", trainer_json(cfg.trainer)},
          {"env", env_json(cfg.env)},
          {"output_dir", cfg.output_dir},
          {"checkpoint_interval", cfg.checkpoint_interval},
          {"eval_episodes", cfg.eval_episodes},
          {"oracle",
           {{"budget", o.budget ? json(*o.budget) : json()},
            {"eta_factors", o.eta_factors},
            {"alpha", o.alpha},
            {"h", o.h ? json(*o.h) : json()},
            {"strict", o.strict},
            {"max_iters", o.max_iters}}},
          {"sweep", {{"axes", axes}, {"seeds", cfg.sweep.seeds}, {"workers", cfg.sweep.workers}}}};
}

void set_path(nlohmann::json& j, const std::string& path, const nlohmann::json& value) {
  if (path.empty()) throw ConfigError("", "empty override path");
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ConfigError(path, "malformed override path");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError(path, "path crosses a non-object value");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace ip3o
