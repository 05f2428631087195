#pragma once

#include <cstdint>

#include "trajlab/contract.hpp"

namespace trajlab::rl {

// TD3-with-demo-restarts settings. The algorithm constants (start timesteps,
// exploration noise, batch size, gamma, target rates, policy noise/clip/
// frequency, beta, segment length, restart probability and decay) follow the
// reference table; total timesteps and buffer capacity default to desk scale
// (full scale: 10M steps, 1M capacity, hidden 256).
struct Td3Config {
  std::int64_t start_timesteps = 25000;
  std::int64_t total_timesteps = 300000;
  double exploration_noise = 0.1;
  int batch_size = 256;
  double gamma = 0.98;
  double target_update_rate = 0.005;
  double policy_noise = 0.2;
  double noise_clip = 0.5;
  int policy_frequency = 2;
  double beta = 0.7;
  int segment_length = 15;
  double demo_restart_prob_init = 0.7;
  double demo_restart_decay = 0.999996;

  std::size_t buffer_capacity = 200000;
  int hidden_size = 64;
  double learning_rate = 1e-3;
  // Couple the target policy with the batch's executed action as a_prev
  // (Bellman-consistent with the behavior coupling). Off reproduces plain
  // uncoupled TD3 targets.
  bool couple_target = true;
  std::int64_t eval_interval = 5000;
  int eval_episodes = 5;

  void validate() const {
    if (start_timesteps < 0 || total_timesteps < 0) throw ConfigError("rl: negative timesteps");
    if (exploration_noise < 0.0) throw ConfigError("rl: exploration_noise must be >= 0");
    if (batch_size < 1) throw ConfigError("rl: batch_size must be >= 1");
    if (gamma <= 0.0 || gamma >= 1.0) throw ConfigError("rl: gamma must be in (0, 1)");
    if (target_update_rate < 0.0 || target_update_rate > 1.0) {
      throw ConfigError("rl: target_update_rate must be in [0, 1]");
    }
    if (policy_frequency < 1) throw ConfigError("rl: policy_frequency must be >= 1");
    if (beta < 0.0 || beta > 1.0) throw ConfigError("rl: beta must be in [0, 1]");
    if (segment_length < 1) throw ConfigError("rl: segment_length must be >= 1");
    if (demo_restart_prob_init < 0.0 || demo_restart_prob_init > 1.0) {
      throw ConfigError("rl: demo_restart_prob_init must be in [0, 1]");
    }
    if (demo_restart_decay <= 0.0 || demo_restart_decay > 1.0) {
      throw ConfigError("rl: demo_restart_decay must be in (0, 1]");
    }
    if (buffer_capacity < static_cast<std::size_t>(batch_size)) {
      throw ConfigError("rl: buffer_capacity must be >= batch_size");
    }
    if (hidden_size < 1) throw ConfigError("rl: hidden_size must be >= 1");
    if (eval_interval < 1 || eval_episodes < 1) throw ConfigError("rl: bad eval settings");
  }
};

}  // namespace trajlab::rl
