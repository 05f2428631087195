#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "trajlab/contract.hpp"
#include "trajlab/env.hpp"
#include "trajlab/planner/config.hpp"

namespace trajlab::demos {

// Malformed demo file; the message names the offending field.
class DemoParseError : public ConfigError {
 public:
  explicit DemoParseError(const std::string& what) : ConfigError(what) {}
};

// A recorded planner episode: states[0..T], observations[0..T], the executed
// (coupled, clamped) actions[0..T-1] and rewards[0..T-1]. Replaying actions
// from states[0] reproduces the rewards bit-exactly.
struct DemoTrajectory {
  std::string env_id;
  // Non-default env construction parameters (tolerance overrides etc.), so
  // replay can rebuild the exact environment from the file alone.
  std::map<std::string, std::string> env_params;
  std::uint64_t seed = 0;
  std::vector<EnvState> states;
  std::vector<Observation> observations;
  std::vector<std::vector<double>> actions;
  std::vector<double> rewards;
  planner::PlannerConfig planner_config;
  double total_return = 0.0;
  bool success = false;

  int length() const { return static_cast<int>(actions.size()); }
};

namespace detail {

inline nlohmann::json to_json(const planner::PlannerConfig& c) {
  return {{"mode", planner::to_string(c.mode)},
          {"tau", c.tau},
          {"n_traj", c.n_traj},
          {"n_iter", c.n_iter},
          {"beta", c.beta},
          {"f_n", c.f_n},
          {"f_b", c.f_b},
          {"sigma_i", c.sigma_i},
          {"sigma_n", c.sigma_n},
          {"kappa", c.kappa},
          {"mod1", c.mod1},
          {"mod2", c.mod2},
          {"mod3", c.mod3}};
}

inline planner::PlannerConfig planner_config_from_json(const nlohmann::json& j) {
  planner::PlannerConfig c;
  c.mode = planner::planner_mode_from_string(j.at("mode").get<std::string>());
  c.tau = j.at("tau").get<int>();
  c.n_traj = j.at("n_traj").get<int>();
  c.n_iter = j.at("n_iter").get<int>();
  c.beta = j.at("beta").get<double>();
  c.f_n = j.at("f_n").get<double>();
  c.f_b = j.at("f_b").get<double>();
  c.sigma_i = j.at("sigma_i").get<double>();
  c.sigma_n = j.at("sigma_n").get<double>();
  c.kappa = j.at("kappa").get<double>();
  c.mod1 = j.at("mod1").get<bool>();
  c.mod2 = j.at("mod2").get<bool>();
  c.mod3 = j.at("mod3").get<bool>();
  return c;
}

template <typename T>
T field(const nlohmann::json& j, const std::string& name) {
  if (!j.contains(name)) throw DemoParseError("demo file: missing field '" + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DemoParseError("demo file: field '" + name + "' has the wrong type");
  }
}

}  // namespace detail

inline constexpr const char* kDemoFormatTag = "trajlab-demo-v1";

inline void save_demo(const DemoTrajectory& demo, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = kDemoFormatTag;
  j["env_id"] = demo.env_id;
  j["env_params"] = demo.env_params;
  j["seed"] = demo.seed;
  j["success"] = demo.success;
  j["total_return"] = demo.total_return;
  j["planner_config"] = detail::to_json(demo.planner_config);
  nlohmann::json states = nlohmann::json::array();
  for (const auto& s : demo.states) {
    states.push_back({{"step_index", s.step_index}, {"values", s.values}});
  }
  j["states"] = std::move(states);
  nlohmann::json observations = nlohmann::json::array();
  for (const auto& o : demo.observations) {
    nlohmann::json jo;
    jo["components"] = o.components;
    jo["achieved_goal"] = o.achieved_goal ? nlohmann::json(*o.achieved_goal) : nlohmann::json();
    jo["desired_goal"] = o.desired_goal ? nlohmann::json(*o.desired_goal) : nlohmann::json();
    observations.push_back(std::move(jo));
  }
  j["observations"] = std::move(observations);
  j["actions"] = demo.actions;
  j["rewards"] = demo.rewards;

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write demo file '" + path.string() + "'");
  out << j.dump(1) << '\n';
}

// Loads and validates one demo. `known_env` lets the caller warn (not fail)
// on env ids outside the registry.
inline DemoTrajectory load_demo(const std::filesystem::path& path,
                                bool (*known_env)(const std::string&) = nullptr) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read demo file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DemoParseError("demo file '" + path.string() + "': invalid JSON: " + e.what());
  }

  if (detail::field<std::string>(j, "format") != kDemoFormatTag) {
    throw DemoParseError("demo file: field 'format' is not " + std::string(kDemoFormatTag));
  }
  DemoTrajectory demo;
  demo.env_id = detail::field<std::string>(j, "env_id");
  if (j.contains("env_params") && !j.at("env_params").is_null()) {
    try {
      demo.env_params = j.at("env_params").get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception&) {
      throw DemoParseError("demo file: field 'env_params' is malformed");
    }
  }
  demo.seed = detail::field<std::uint64_t>(j, "seed");
  demo.success = detail::field<bool>(j, "success");
  demo.total_return = detail::field<double>(j, "total_return");
  if (!j.contains("planner_config")) throw DemoParseError("demo file: missing field 'planner_config'");
  try {
    demo.planner_config = detail::planner_config_from_json(j.at("planner_config"));
  } catch (const nlohmann::json::exception&) {
    throw DemoParseError("demo file: field 'planner_config' is malformed");
  }

  for (const auto& js : detail::field<nlohmann::json>(j, "states")) {
    EnvState s;
    s.env_id = demo.env_id;
    s.step_index = detail::field<int>(js, "step_index");
    s.values = detail::field<std::vector<double>>(js, "values");
    demo.states.push_back(std::move(s));
  }
  for (const auto& jo : detail::field<nlohmann::json>(j, "observations")) {
    Observation o;
    o.components = detail::field<std::vector<double>>(jo, "components");
    if (jo.contains("achieved_goal") && !jo.at("achieved_goal").is_null()) {
      o.achieved_goal = jo.at("achieved_goal").get<std::vector<double>>();
    }
    if (jo.contains("desired_goal") && !jo.at("desired_goal").is_null()) {
      o.desired_goal = jo.at("desired_goal").get<std::vector<double>>();
    }
    demo.observations.push_back(std::move(o));
  }
  demo.actions = detail::field<std::vector<std::vector<double>>>(j, "actions");
  demo.rewards = detail::field<std::vector<double>>(j, "rewards");

  const std::size_t t = demo.actions.size();
  if (t == 0) throw DemoParseError("demo file: field 'actions' is empty");
  if (demo.rewards.size() != t) {
    throw DemoParseError("demo file: field 'rewards' length differs from 'actions'");
  }
  if (demo.states.size() != t + 1) {
    throw DemoParseError("demo file: field 'states' must have length T+1");
  }
  if (demo.observations.size() != t + 1) {
    throw DemoParseError("demo file: field 'observations' must have length T+1");
  }
  for (const auto& s : demo.states) {
    if (s.values.size() != demo.states.front().values.size()) {
      throw DemoParseError("demo file: field 'states' has inconsistent values lengths");
    }
  }
  double sum = 0.0;
  for (double r : demo.rewards) sum += r;
  if (sum != demo.total_return) {
    throw DemoParseError("demo file: field 'total_return' does not equal the reward sum");
  }
  if (known_env && !known_env(demo.env_id)) {
    std::cerr << "warning: demo file '" << path.string() << "' references env '"
              << demo.env_id << "' not present in the registry\n";
  }
  return demo;
}

struct ReplayReport {
  int first_divergent_step = -1;  // -1: replay matched everywhere
  double max_reward_deviation = 0.0;
  double replayed_return = 0.0;
};

// Replays the demo's actions from its initial state and compares rewards
// bit-exactly against the recording.
inline ReplayReport replay_demo(const DemoTrajectory& demo, Environment& env) {
  ReplayReport report;
  env.restore(demo.states.front());
  for (int t = 0; t < demo.length(); ++t) {
    const double r = env.step_lean(demo.actions[static_cast<std::size_t>(t)]);
    report.replayed_return += r;
    const double dev = std::abs(r - demo.rewards[static_cast<std::size_t>(t)]);
    if (dev > report.max_reward_deviation) report.max_reward_deviation = dev;
    if (dev != 0.0 && report.first_divergent_step < 0) report.first_divergent_step = t;
  }
  return report;
}

}  // namespace trajlab::demos
