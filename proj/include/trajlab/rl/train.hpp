#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "trajlab/demo/store.hpp"
#include "trajlab/env.hpp"
#include "trajlab/rl/td3.hpp"

namespace trajlab::rl {

// Annealed probability of starting a collection segment from a demo state.
// Kept as (initial, decay, step count) and evaluated as
// initial * decay^steps, which matches the per-step multiplicative decay
// without accumulating rounding over hundreds of thousands of steps.
struct RestartSchedule {
  double initial = 0.7;
  double decay = 0.999996;
  std::int64_t steps = 0;

  double current() const { return initial * std::pow(decay, static_cast<double>(steps)); }
};

// Rolling collection state across segments: the ongoing episode's latest
// observation and previously executed action.
struct CollectorState {
  std::uint64_t master_seed = 0;
  std::vector<double> obs;
  std::vector<double> a_prev;
  bool episode_active = false;
  std::int64_t reset_count = 0;
};

// Collects up to `max_steps` env steps (one segment). At the segment start,
// with probability restart.current() the simulator is loaded to a uniformly
// random demo (trajectory, timestep) and a_prev is seeded with the demo's
// action there; otherwise the ongoing episode continues, resetting naturally
// at episode end. Every transition stores the executed action; done flags in
// the buffer mark true terminal states only (episode timeouts are a
// bookkeeping detail, so the bundled envs never set one).
inline int collect_segment(Environment& env, const nn::Mlp& actor, ReplayBuffer& buffer,
                           const demos::DemoStore* demo_store, RestartSchedule& restart,
                           const Td3Config& config, RngStream& rng, CollectorState& state,
                           bool random_policy, int max_steps = -1) {
  const int ad = env.action_dim();
  const int steps = max_steps < 0 ? config.segment_length
                                  : std::min(max_steps, config.segment_length);

  if (demo_store != nullptr && !demo_store->empty() && rng.uniform() < restart.current()) {
    const auto point = demo_store->sample_restart(rng);
    env.restore(*point.state);
    state.obs = point.observation->components;
    state.a_prev = *point.prev_action;
    state.episode_active = env.remaining_steps() > 0;
  }

  int added = 0;
  for (int s = 0; s < steps; ++s) {
    if (!state.episode_active) {
      const auto obs = env.reset(derive_stream(state.master_seed, 0x636f6cULL,
                                               static_cast<std::uint64_t>(state.reset_count++)));
      state.obs = obs.components;
      state.a_prev.assign(static_cast<std::size_t>(ad), 0.0);
      state.episode_active = true;
    }
    std::vector<double> action;
    if (random_policy) {
      action.resize(static_cast<std::size_t>(ad));
      for (double& a : action) a = rng.uniform(-1.0, 1.0);
    } else {
      action = coupled_policy_action(actor, state.obs, state.a_prev, config.beta,
                                     config.exploration_noise, rng);
    }
    const StepResult result = env.step({action});
    buffer.push(state.obs, state.a_prev, action, result.reward,
                result.observation.components, /*done=*/false);
    ++restart.steps;
    ++added;
    state.obs = result.observation.components;
    state.a_prev = action;
    if (result.done) state.episode_active = false;
  }
  return added;
}

struct EvalPoint {
  std::int64_t env_step = 0;
  double median_return = 0.0;
  double min_return = 0.0;
  double max_return = 0.0;
  double p_restart = 0.0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  std::vector<EvalPoint> curve;
  double final_median_return = 0.0;
};

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Deterministic-policy evaluation (noise 0) on a fresh replica.
inline std::vector<double> evaluate_policy(const Environment& prototype, const nn::Mlp& actor,
                                           const Td3Config& config, std::uint64_t eval_seed,
                                           int episodes) {
  auto env = prototype.clone();
  RngStream unused(0);
  std::vector<double> returns;
  returns.reserve(static_cast<std::size_t>(episodes));
  for (int ep = 0; ep < episodes; ++ep) {
    auto obs = env->reset(derive_stream(eval_seed, static_cast<std::uint64_t>(ep)));
    std::vector<double> a_prev(static_cast<std::size_t>(env->action_dim()), 0.0);
    double total = 0.0;
    for (int t = 0; t < env->episode_length(); ++t) {
      const auto action =
          coupled_policy_action(actor, obs.components, a_prev, config.beta, 0.0, unused);
      const auto result = env->step({action});
      total += result.reward;
      obs = result.observation;
      a_prev = action;
    }
    returns.push_back(total);
  }
  return returns;
}

// TD3 training with demo-restart segment collection. Alternates
// collect_segment with one td3_update per env step after start_timesteps
// (warmup steps use a uniform random policy). Periodically evaluates the
// deterministic policy and appends to the learning curve; writes curve.csv
// and final checkpoints under out_dir when given.
inline TrainResult train(Environment& env, const Td3Config& config,
                         const demos::DemoStore* demo_store, std::uint64_t seed,
                         const std::filesystem::path& out_dir = {}, bool no_timing = false) {
  config.validate();
  if (config.demo_restart_prob_init > 0.0 && demo_store != nullptr && demo_store->empty()) {
    throw ConfigError("train: demo store is empty but demo_restart_prob_init > 0");
  }

  const int od = env.observation_dim();
  const int ad = env.action_dim();
  Td3Agent agent(od, ad, config.hidden_size, config.learning_rate, derive_stream(seed, 0x6e6eULL));
  ReplayBuffer buffer(config.buffer_capacity, od, ad);
  RngStream behavior_rng(derive_stream(seed, 0x626568ULL));
  RngStream update_rng(derive_stream(seed, 0x757064ULL));

  RestartSchedule restart;
  restart.initial = demo_store == nullptr ? 0.0 : config.demo_restart_prob_init;
  restart.decay = config.demo_restart_decay;

  CollectorState state;
  state.master_seed = seed;

  const auto wall_start = std::chrono::steady_clock::now();
  TrainResult result;
  auto record_eval = [&](std::int64_t env_step) {
    const auto returns = evaluate_policy(env, agent.actor, config,
                                         derive_stream(seed, 0x6576616cULL,
                                                       static_cast<std::uint64_t>(env_step)),
                                         config.eval_episodes);
    EvalPoint point;
    point.env_step = env_step;
    point.median_return = median_of(returns);
    point.min_return = *std::min_element(returns.begin(), returns.end());
    point.max_return = *std::max_element(returns.begin(), returns.end());
    point.p_restart = restart.current();
    point.wall_seconds =
        no_timing ? 0.0
                  : std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
                        .count();
    result.curve.push_back(point);
  };

  record_eval(0);
  std::int64_t steps_done = 0;
  std::int64_t updates_done = 0;
  std::int64_t next_eval = config.eval_interval;
  while (steps_done < config.total_timesteps) {
    const int budget = static_cast<int>(
        std::min<std::int64_t>(config.segment_length, config.total_timesteps - steps_done));
    steps_done += collect_segment(env, agent.actor, buffer, demo_store, restart, config,
                                  behavior_rng, state,
                                  /*random_policy=*/steps_done < config.start_timesteps, budget);
    const std::int64_t updates_due = std::max<std::int64_t>(0, steps_done - config.start_timesteps);
    for (; updates_done < updates_due; ++updates_done) {
      td3_update(agent, buffer, config, update_rng);
    }
    if (steps_done >= next_eval || steps_done >= config.total_timesteps) {
      record_eval(steps_done);
      while (next_eval <= steps_done) next_eval += config.eval_interval;
    }
  }
  result.final_median_return = result.curve.back().median_return;

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(out_dir / "curve.csv");
    csv << "env_step,eval_median_return,eval_min_return,eval_max_return,p_restart,wall_seconds\n";
    char buf[160];
    for (const auto& p : result.curve) {
      std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g,%.3f\n",
                    static_cast<long long>(p.env_step), p.median_return, p.min_return,
                    p.max_return, p.p_restart, p.wall_seconds);
      csv << buf;
    }
    agent.actor.save(out_dir / "actor.mlp");
    agent.critic1.save(out_dir / "critic1.mlp");
    agent.critic2.save(out_dir / "critic2.mlp");
  }
  return result;
}

}  // namespace trajlab::rl
