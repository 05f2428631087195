#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "trajlab/env.hpp"
#include "trajlab/envs/configs.hpp"

namespace trajlab::envs {

// 2-D force-controlled point mass in a walled square arena; the goal is a
// position. Dense reward is 1 - min(1, d / d_max) with d_max the arena
// diameter, so it lies in [0, 1]; sparse reward is 1 inside the tolerance
// ball. State layout: [x0, x1, v0, v1, goal0, goal1].
class PointMassReach final : public Environment {
 public:
  static constexpr double kForceGain = 3.0;
  static constexpr double kDrag = 0.2;
  static constexpr double kArenaHalfWidth = 0.25;
  static constexpr double kSpawnHalfWidth = 0.2;
  // Start/goal separation window: close enough that sparse search is
  // feasible, far enough that a lucky spawn is never already solved.
  static constexpr double kMinSeparation = 0.12;
  static constexpr double kMaxSeparation = 0.38;

  explicit PointMassReach(GoalEnvConfig config = {}) : config_(config) {
    config_.validate();
    id_ = config_.reward_mode == RewardMode::kSparse ? "point_reach-sparse"
                                                     : "point_reach-dense";
    values_.assign(6, 0.0);
  }

  const std::string& id() const override { return id_; }
  int action_dim() const override { return 2; }
  int observation_dim() const override { return 4; }
  int state_size() const override { return 6; }
  int episode_length() const override { return config_.episode_length; }
  bool goal_based() const override { return true; }
  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<PointMassReach>(*this);
  }

  static double arena_diameter() { return 2.0 * kArenaHalfWidth * std::sqrt(2.0); }
  const GoalEnvConfig& config() const { return config_; }

 protected:
  void do_reset(RngStream& rng) override {
    values_[0] = rng.uniform(-kSpawnHalfWidth, kSpawnHalfWidth);
    values_[1] = rng.uniform(-kSpawnHalfWidth, kSpawnHalfWidth);
    values_[2] = 0.0;
    values_[3] = 0.0;
    // Rejection-sample the goal into the separation window.
    while (true) {
      const double g0 = rng.uniform(-kSpawnHalfWidth, kSpawnHalfWidth);
      const double g1 = rng.uniform(-kSpawnHalfWidth, kSpawnHalfWidth);
      const double d = std::hypot(g0 - values_[0], g1 - values_[1]);
      if (d >= kMinSeparation && d <= kMaxSeparation) {
        values_[4] = g0;
        values_[5] = g1;
        break;
      }
    }
  }

  double step_core(std::span<const double> a) override {
    for (int i = 0; i < 2; ++i) {
      double v = (1.0 - kDrag) * values_[2 + i] + kDt * kForceGain * a[i];
      double x = values_[i] + kDt * v;
      if (x < -kArenaHalfWidth || x > kArenaHalfWidth) {
        x = std::clamp(x, -kArenaHalfWidth, kArenaHalfWidth);
        v = 0.0;  // wall contact kills the normal velocity component
      }
      values_[i] = x;
      values_[2 + i] = v;
    }
    return reward_at_distance(goal_distance());
  }

  Observation do_observe() const override {
    Observation obs;
    obs.components = {values_[0], values_[1], values_[2], values_[3]};
    obs.achieved_goal = std::vector<double>{values_[0], values_[1]};
    obs.desired_goal = std::vector<double>{values_[4], values_[5]};
    return obs;
  }

  bool do_success() const override { return goal_distance() < config_.distance_tolerance; }

 private:
  double goal_distance() const {
    return std::hypot(values_[0] - values_[4], values_[1] - values_[5]);
  }

  double reward_at_distance(double d) const {
    if (config_.reward_mode == RewardMode::kSparse) {
      return d < config_.distance_tolerance ? 1.0 : 0.0;
    }
    return 1.0 - std::min(1.0, d / arena_diameter());
  }

  GoalEnvConfig config_;
  std::string id_;
};

}  // namespace trajlab::envs
