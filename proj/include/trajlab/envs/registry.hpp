#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "trajlab/envs/double_integrator.hpp"
#include "trajlab/envs/planar_arm_reach.hpp"
#include "trajlab/envs/point_mass_reach.hpp"
#include "trajlab/envs/rotor_spin.hpp"

namespace trajlab::envs {

using EnvParams = std::map<std::string, std::string>;

inline const std::vector<std::string>& registered_env_ids() {
  static const std::vector<std::string> ids = {
      "point_reach-sparse", "point_reach-dense", "arm_reach-sparse",
      "arm_reach-dense",    "rotor_spin",        "double_integrator",
  };
  return ids;
}

inline bool is_registered_env(const std::string& id) {
  for (const auto& known : registered_env_ids()) {
    if (known == id) return true;
  }
  return false;
}

namespace detail {

inline double param_double(const EnvParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError("env parameter '" + key + "': bad number '" + it->second + "'");
  }
}

inline int param_int(const EnvParams& p, const std::string& key, int fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw ConfigError("env parameter '" + key + "': bad integer '" + it->second + "'");
  }
}

inline GoalEnvConfig goal_config(const EnvParams& p, RewardMode mode) {
  GoalEnvConfig cfg;
  cfg.reward_mode = mode;
  cfg.episode_length = param_int(p, "episode_length", cfg.episode_length);
  cfg.distance_tolerance = param_double(p, "tolerance", cfg.distance_tolerance);
  return cfg;
}

}  // namespace detail

// Builds a registered environment. Bare goal-env ids ("point_reach",
// "arm_reach") map to the dense variant. Recognized params: episode_length,
// tolerance, num_links (arm), num_actuators / tilt_penalty / tilt_limit
// (rotor). Unknown ids raise ConfigError.
inline std::unique_ptr<Environment> make_env(const std::string& id,
                                             const EnvParams& params = {}) {
  using detail::goal_config;
  if (id == "point_reach-sparse") {
    return std::make_unique<PointMassReach>(goal_config(params, RewardMode::kSparse));
  }
  if (id == "point_reach-dense" || id == "point_reach") {
    return std::make_unique<PointMassReach>(goal_config(params, RewardMode::kDense));
  }
  if (id == "arm_reach-sparse" || id == "arm_reach-dense" || id == "arm_reach") {
    const auto mode = id == "arm_reach-sparse" ? RewardMode::kSparse : RewardMode::kDense;
    return std::make_unique<PlanarArmReach>(goal_config(params, mode),
                                            detail::param_int(params, "num_links", 6));
  }
  if (id == "rotor_spin") {
    RotorSpinConfig cfg;
    cfg.episode_length = detail::param_int(params, "episode_length", cfg.episode_length);
    cfg.tilt_penalty = detail::param_double(params, "tilt_penalty", cfg.tilt_penalty);
    cfg.num_actuators = detail::param_int(params, "num_actuators", cfg.num_actuators);
    cfg.tilt_limit = detail::param_double(params, "tilt_limit", cfg.tilt_limit);
    return std::make_unique<RotorSpin>(cfg);
  }
  if (id == "double_integrator") {
    return std::make_unique<DoubleIntegrator>();
  }
  throw ConfigError("unknown env id '" + id + "'");
}

}  // namespace trajlab::envs
