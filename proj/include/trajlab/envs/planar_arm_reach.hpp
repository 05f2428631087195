#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "trajlab/env.hpp"
#include "trajlab/envs/configs.hpp"

namespace trajlab::envs {

// Torque-controlled planar chain of unit links (gravity disabled); the goal
// is an end-effector position. Joint angles are absolute-cumulative, so
// angles (pi/2, 0, ..., 0) put the tip at (0, num_links). Reward and success
// semantics match PointMassReach. State layout:
// [theta_0..theta_{n-1}, thetadot_0..thetadot_{n-1}, goal0, goal1].
class PlanarArmReach final : public Environment {
 public:
  static constexpr double kTorqueGain = 2.0;
  static constexpr double kDrag = 0.2;

  explicit PlanarArmReach(GoalEnvConfig config = {}, int num_links = 6)
      : config_(config), num_links_(num_links) {
    config_.validate();
    if (num_links_ < 2) throw ConfigError("planar_arm_reach: num_links must be >= 2");
    id_ = config_.reward_mode == RewardMode::kSparse ? "arm_reach-sparse"
                                                     : "arm_reach-dense";
    values_.assign(2 * num_links_ + 2, 0.0);
  }

  const std::string& id() const override { return id_; }
  int action_dim() const override { return num_links_; }
  int observation_dim() const override { return 2 * num_links_; }
  int state_size() const override { return 2 * num_links_ + 2; }
  int episode_length() const override { return config_.episode_length; }
  bool goal_based() const override { return true; }
  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<PlanarArmReach>(*this);
  }

  int num_links() const { return num_links_; }
  double arena_diameter() const { return 2.0 * num_links_; }

  // Forward kinematics of the tip for the stored joint angles.
  std::pair<double, double> tip_position() const {
    double cum = 0.0, x = 0.0, y = 0.0;
    for (int i = 0; i < num_links_; ++i) {
      cum += values_[i];
      x += std::cos(cum);
      y += std::sin(cum);
    }
    return {x, y};
  }

 protected:
  void do_reset(RngStream& rng) override {
    for (int i = 0; i < num_links_; ++i) values_[i] = rng.uniform(-0.1, 0.1);
    for (int i = 0; i < num_links_; ++i) values_[num_links_ + i] = 0.0;
    const double angle = rng.uniform(0.0, 6.283185307179586);
    const double radius = rng.uniform(0.3 * num_links_, 0.9 * num_links_);
    values_[2 * num_links_] = radius * std::cos(angle);
    values_[2 * num_links_ + 1] = radius * std::sin(angle);
  }

  double step_core(std::span<const double> a) override {
    for (int i = 0; i < num_links_; ++i) {
      double& theta = values_[i];
      double& omega = values_[num_links_ + i];
      omega = (1.0 - kDrag) * omega + kDt * kTorqueGain * a[i];
      theta += kDt * omega;
    }
    return reward_at_distance(goal_distance());
  }

  Observation do_observe() const override {
    Observation obs;
    obs.components.assign(values_.begin(), values_.begin() + 2 * num_links_);
    const auto [tx, ty] = tip_position();
    obs.achieved_goal = std::vector<double>{tx, ty};
    obs.desired_goal =
        std::vector<double>{values_[2 * num_links_], values_[2 * num_links_ + 1]};
    return obs;
  }

  bool do_success() const override { return goal_distance() < config_.distance_tolerance; }

 private:
  double goal_distance() const {
    const auto [tx, ty] = tip_position();
    return std::hypot(tx - values_[2 * num_links_], ty - values_[2 * num_links_ + 1]);
  }

  double reward_at_distance(double d) const {
    if (config_.reward_mode == RewardMode::kSparse) {
      return d < config_.distance_tolerance ? 1.0 : 0.0;
    }
    return 1.0 - std::min(1.0, d / arena_diameter());
  }

  GoalEnvConfig config_;
  int num_links_;
  std::string id_;
};

}  // namespace trajlab::envs
