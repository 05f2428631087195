#pragma once

#include "trajlab/contract.hpp"

namespace trajlab::envs {

enum class RewardMode { kSparse, kDense };

struct GoalEnvConfig {
  int episode_length = 50;
  double distance_tolerance = 0.01;
  RewardMode reward_mode = RewardMode::kDense;

  void validate() const {
    if (episode_length < 1) throw ConfigError("episode_length must be >= 1");
    if (distance_tolerance <= 0.0) throw ConfigError("distance_tolerance must be > 0");
  }
};

struct RotorSpinConfig {
  int episode_length = 250;
  double tilt_penalty = 15.0;
  int num_actuators = 8;
  double tilt_limit = 0.6;

  void validate() const {
    if (episode_length < 1) throw ConfigError("episode_length must be >= 1");
    if (tilt_penalty < 0.0) throw ConfigError("tilt_penalty must be >= 0");
    if (num_actuators < 2) throw ConfigError("num_actuators must be >= 2");
    if (tilt_limit <= 0.0) throw ConfigError("tilt_limit must be > 0");
  }
};

}  // namespace trajlab::envs
