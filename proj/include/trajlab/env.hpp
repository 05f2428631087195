#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trajlab/contract.hpp"
#include "trajlab/rng.hpp"

namespace trajlab {

// Shared integrator timestep for every bundled environment (semi-implicit
// Euler throughout).
inline constexpr double kDt = 0.05;

// Opaque, fully serializable simulator snapshot. `values` is a flat
// environment-defined layout; its length is constant per env_id.
struct EnvState {
  std::vector<double> values;
  std::string env_id;
  int step_index = 0;
};

struct Action {
  std::vector<double> components;
};

struct Observation {
  std::vector<double> components;
  std::optional<std::vector<double>> achieved_goal;
  std::optional<std::vector<double>> desired_goal;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  bool success = false;
};

// Environment contract consumed by every planner and learner: deterministic
// stepping, bit-exact snapshot/restore, explicit seeding. Environments are
// single-threaded objects; `clone()` produces an independent replica so the
// rollout engine can hand one to each worker.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const std::string& id() const = 0;
  virtual int action_dim() const = 0;
  virtual int observation_dim() const = 0;
  virtual int state_size() const = 0;
  virtual int episode_length() const = 0;
  virtual bool goal_based() const { return false; }
  virtual std::unique_ptr<Environment> clone() const = 0;

  // Seeded reset; identical seed -> identical initial state and goal.
  Observation reset(std::uint64_t seed) {
    RngStream rng(derive_stream(seed, 0x7265736574ULL));  // "reset" salt
    step_index_ = 0;
    do_reset(rng);
    return observe();
  }

  // One deterministic step. Out-of-range action components are clamped to
  // [-1, 1] before integration. After the episode has ended the state is
  // inert: no integration, zero reward.
  StepResult step(const Action& action) {
    const double r = step_lean(action.components);
    StepResult result;
    result.observation = observe();
    result.reward = r;
    result.done = step_index_ >= episode_length();
    result.success = current_success();
    return result;
  }

  // Same transition as step() without materializing an Observation; the
  // rollout hot loop uses this path. Both paths share step_core, so rewards
  // are bit-identical between them.
  double step_lean(std::span<const double> action) {
    check_contract(static_cast<int>(action.size()) == action_dim(),
                   id() + ": action dimension mismatch");
    if (step_index_ >= episode_length()) return 0.0;
    clamped_.resize(action.size());
    for (std::size_t i = 0; i < action.size(); ++i) {
      clamped_[i] = std::clamp(action[i], -1.0, 1.0);
    }
    const double reward = step_core(clamped_);
    ++step_index_;
    return reward;
  }

  EnvState snapshot() const {
    EnvState s;
    s.values = values_;
    s.env_id = id();
    s.step_index = step_index_;
    return s;
  }

  void restore(const EnvState& state) {
    check_contract(state.env_id == id(),
                   "restore: state for '" + state.env_id + "' given to '" + id() + "'");
    check_contract(static_cast<int>(state.values.size()) == state_size(),
                   id() + ": restore with wrong values length");
    check_contract(state.step_index >= 0, id() + ": restore with negative step index");
    values_ = state.values;
    step_index_ = state.step_index;
  }

  Observation observe() const { return do_observe(); }
  bool current_success() const { return goal_based() ? do_success() : false; }

  int step_index() const { return step_index_; }
  int remaining_steps() const { return std::max(0, episode_length() - step_index_); }

 protected:
  // Dynamics hooks. `do_step` integrates one clamped action and returns the
  // step reward; `do_reset` fills values_ from the stream.
  virtual void do_reset(RngStream& rng) = 0;
  virtual double step_core(std::span<const double> clamped_action) = 0;
  virtual Observation do_observe() const = 0;
  virtual bool do_success() const { return false; }

  std::vector<double> values_;
  int step_index_ = 0;

 private:
  std::vector<double> clamped_;
};

}  // namespace trajlab
