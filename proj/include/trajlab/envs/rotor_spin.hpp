#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "trajlab/env.hpp"
#include "trajlab/envs/configs.hpp"

namespace trajlab::envs {

// Planar spin-the-rotor task. k actuators feed torque into the spin rate
// and the tilt axis through fixed pseudo-random mixing vectors; the spin
// mixing rotates with the spin angle (contact points move as the rotor
// turns), so sustained acceleration needs an action pattern phase-locked to
// theta:
//   spin torque = cos(theta) w_a . a + sin(theta) w_b . a.
// Spinning also drives tilt drift, and tilt must be held inside the limit:
// past it the rotor is "dropped", the state freezes, and every remaining
// step pays -1. Reward is omega - lambda * |phi| on the post-step state.
// Not goal-based. State layout: [theta, omega, phi, phidot, dropped].
class RotorSpin final : public Environment {
 public:
  static constexpr double kSpinGain = 1.5;
  static constexpr double kTiltGain = 1.5;
  static constexpr double kSpinTiltCoupling = 0.15;
  static constexpr double kSpinDrag = 0.02;
  static constexpr double kTiltDrag = 0.03;
  static constexpr double kTiltSpring = 0.05;
  static constexpr double kResetTiltRange = 0.05;

  explicit RotorSpin(RotorSpinConfig config = {}) : config_(config) {
    config_.validate();
    values_.assign(5, 0.0);
    // Fixed seeded mixing vectors, constant per actuator count.
    RngStream mix(derive_stream(0x524f544f52ULL, static_cast<std::uint64_t>(config_.num_actuators)));
    w_spin_a_.resize(config_.num_actuators);
    w_spin_b_.resize(config_.num_actuators);
    w_tilt_.resize(config_.num_actuators);
    for (double& w : w_spin_a_) w = mix.uniform(-1.0, 1.0);
    for (double& w : w_spin_b_) w = mix.uniform(-1.0, 1.0);
    for (double& w : w_tilt_) w = mix.uniform(-1.0, 1.0);
  }

  const std::string& id() const override { return id_; }
  int action_dim() const override { return config_.num_actuators; }
  int observation_dim() const override { return 6; }
  int state_size() const override { return 5; }
  int episode_length() const override { return config_.episode_length; }
  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<RotorSpin>(*this);
  }

  const RotorSpinConfig& config() const { return config_; }
  bool dropped() const { return values_[4] != 0.0; }

  // The spin reward as a function of state; odd in omega at phi = 0.
  static double spin_reward(double omega, double phi, double tilt_penalty) {
    return omega - tilt_penalty * std::abs(phi);
  }

 protected:
  void do_reset(RngStream& rng) override {
    values_[0] = 0.0;
    values_[1] = 0.0;
    values_[2] = rng.uniform(-kResetTiltRange, kResetTiltRange);
    values_[3] = 0.0;
    values_[4] = 0.0;
  }

  double step_core(std::span<const double> a) override {
    if (dropped()) return -1.0;
    double spin_a = 0.0, spin_b = 0.0, tilt_torque = 0.0;
    for (int i = 0; i < config_.num_actuators; ++i) {
      spin_a += w_spin_a_[i] * a[i];
      spin_b += w_spin_b_[i] * a[i];
      tilt_torque += w_tilt_[i] * a[i];
    }
    double& theta = values_[0];
    double& omega = values_[1];
    double& phi = values_[2];
    double& phidot = values_[3];
    const double spin_torque = std::cos(theta) * spin_a + std::sin(theta) * spin_b;
    omega = (1.0 - kSpinDrag) * omega + kDt * kSpinGain * spin_torque;
    phidot = (1.0 - kTiltDrag) * phidot +
             kDt * (kTiltGain * tilt_torque + kSpinTiltCoupling * omega - kTiltSpring * phi);
    phi += kDt * phidot;
    theta += kDt * omega;
    if (std::abs(phi) > config_.tilt_limit) {
      values_[4] = 1.0;
      return -1.0;
    }
    return spin_reward(omega, phi, config_.tilt_penalty);
  }

  Observation do_observe() const override {
    Observation obs;
    obs.components = {std::cos(values_[0]), std::sin(values_[0]),
                      values_[1], values_[2], values_[3], values_[4]};
    return obs;
  }

 private:
  RotorSpinConfig config_;
  std::string id_ = "rotor_spin";
  std::vector<double> w_spin_a_;
  std::vector<double> w_spin_b_;
  std::vector<double> w_tilt_;
};

}  // namespace trajlab::envs
