#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trajlab/contract.hpp"
#include "trajlab/rng.hpp"

namespace trajlab::rl {

// One off-policy transition. `action` is always the executed (coupled,
// clamped) action; `prev_action` is the executed action one step earlier,
// which the coupled policy and critics consume alongside the observation.
struct ReplayTransition {
  std::vector<double> obs;
  std::vector<double> prev_action;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_obs;
  bool done = false;
};

// Fixed-capacity ring with uniform sampling. Storage is struct-of-flat-
// arrays to keep batch gathering cheap.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int obs_dim, int action_dim)
      : capacity_(capacity), obs_dim_(obs_dim), action_dim_(action_dim) {
    check_contract(capacity > 0, "replay buffer: capacity must be > 0");
    obs_.resize(capacity * obs_dim);
    prev_action_.resize(capacity * action_dim);
    action_.resize(capacity * action_dim);
    reward_.resize(capacity);
    next_obs_.resize(capacity * obs_dim);
    done_.resize(capacity);
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  int obs_dim() const { return obs_dim_; }
  int action_dim() const { return action_dim_; }

  void push(std::span<const double> obs, std::span<const double> prev_action,
            std::span<const double> action, double reward,
            std::span<const double> next_obs, bool done) {
    check_contract(static_cast<int>(obs.size()) == obs_dim_ &&
                       static_cast<int>(next_obs.size()) == obs_dim_ &&
                       static_cast<int>(prev_action.size()) == action_dim_ &&
                       static_cast<int>(action.size()) == action_dim_,
                   "replay buffer: transition shape mismatch");
    const std::size_t i = head_;
    std::copy(obs.begin(), obs.end(), obs_.begin() + i * obs_dim_);
    std::copy(prev_action.begin(), prev_action.end(), prev_action_.begin() + i * action_dim_);
    std::copy(action.begin(), action.end(), action_.begin() + i * action_dim_);
    reward_[i] = reward;
    std::copy(next_obs.begin(), next_obs.end(), next_obs_.begin() + i * obs_dim_);
    done_[i] = done ? 1.0 : 0.0;
    head_ = (head_ + 1) % capacity_;
    if (size_ < capacity_) ++size_;
  }

  // Uniform index draw over stored items.
  std::size_t sample_index(RngStream& rng) const {
    check_contract(size_ > 0, "replay buffer: sampling from empty buffer");
    return static_cast<std::size_t>(rng.uniform_int(static_cast<int>(size_)));
  }

  std::span<const double> obs_at(std::size_t i) const {
    return {obs_.data() + i * obs_dim_, static_cast<std::size_t>(obs_dim_)};
  }
  std::span<const double> prev_action_at(std::size_t i) const {
    return {prev_action_.data() + i * action_dim_, static_cast<std::size_t>(action_dim_)};
  }
  std::span<const double> action_at(std::size_t i) const {
    return {action_.data() + i * action_dim_, static_cast<std::size_t>(action_dim_)};
  }
  double reward_at(std::size_t i) const { return reward_[i]; }
  std::span<const double> next_obs_at(std::size_t i) const {
    return {next_obs_.data() + i * obs_dim_, static_cast<std::size_t>(obs_dim_)};
  }
  double done_at(std::size_t i) const { return done_[i]; }

 private:
  std::size_t capacity_;
  int obs_dim_;
  int action_dim_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  std::vector<double> obs_, prev_action_, action_, reward_, next_obs_, done_;
};

}  // namespace trajlab::rl
