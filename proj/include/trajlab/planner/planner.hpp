#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "trajlab/demo/trajectory.hpp"
#include "trajlab/env.hpp"
#include "trajlab/planner/config.hpp"
#include "trajlab/planner/ops.hpp"
#include "trajlab/rng.hpp"
#include "trajlab/rollout/engine.hpp"

namespace trajlab::planner {

// Candidate population for one planning step. mu holds the N mean sequences
// (N x tau x a_d); actions holds the coupled sequences with slot 0 pinned to
// the previously executed action (N x (tau+1) x a_d).
struct PlanState {
  std::uint64_t master_seed = 0;
  int plan_step = 0;
  int tau = 0;
  int action_dim = 0;
  int n_traj = 0;

  std::vector<double> mu;
  std::vector<double> actions;
  std::vector<double> returns;

  // Best-ever candidate within the current planning step.
  std::vector<double> best_mu;
  double best_return = -std::numeric_limits<double>::infinity();
  // Running best after each iteration (monotonicity audit hook).
  std::vector<double> best_history;

  // Carry-over between planning steps (modification 2).
  bool has_warm = false;
  std::vector<double> warm_mu;

  std::span<double> mu_of(int n) {
    return {mu.data() + static_cast<std::size_t>(n) * tau * action_dim,
            static_cast<std::size_t>(tau) * action_dim};
  }
  std::span<const double> mu_of(int n) const {
    return {mu.data() + static_cast<std::size_t>(n) * tau * action_dim,
            static_cast<std::size_t>(tau) * action_dim};
  }
};

// Sampling-based MPC over any Environment: mppi, a cross-entropy variant,
// and the elite-duplication planner with individually toggleable
// modifications. Candidate evaluation fans out through the rollout engine;
// everything else is single-threaded and reproducible from the master seed
// via per-(planning step, iteration, candidate) derived streams.
class Planner {
 public:
  Planner(PlannerConfig config, rollout::RolloutEngine& engine)
      : config_(config), engine_(&engine) {
    config_.validate();
  }

  const PlannerConfig& config() const { return config_; }

  PlanState make_state(const Environment& env, std::uint64_t master_seed) const {
    PlanState plan;
    plan.master_seed = master_seed;
    plan.tau = config_.tau;
    plan.action_dim = env.action_dim();
    plan.n_traj = config_.n_traj;
    const std::size_t n = static_cast<std::size_t>(config_.n_traj);
    plan.mu.assign(n * config_.tau * plan.action_dim, 0.0);
    plan.actions.assign(n * (config_.tau + 1) * plan.action_dim, 0.0);
    plan.returns.assign(n, 0.0);
    plan.best_mu.assign(static_cast<std::size_t>(config_.tau) * plan.action_dim, 0.0);
    return plan;
  }

  // One planning step: N_i iterations of {noise -> couple -> evaluate ->
  // select}, then the first action of the chosen sequence blended with
  // a_prev and clamped. Advances plan.plan_step.
  Action plan_action(const Environment& prototype, const EnvState& current,
                     const Action& a_prev, PlanState& plan) {
    const int n = config_.n_traj;
    const int tau = config_.tau;
    const int ad = plan.action_dim;
    const bool cem = config_.mode == PlannerMode::kCem;
    const bool elite = config_.elite_selection();

    initialize_population(plan);

    std::vector<double> cem_mean(static_cast<std::size_t>(tau) * ad, 0.0);
    std::vector<double> cem_std(static_cast<std::size_t>(tau) * ad, config_.sigma_i);
    std::vector<double> mean_mu(static_cast<std::size_t>(tau) * ad, 0.0);
    std::vector<double> scratch(plan.mu.size());

    plan.best_return = -std::numeric_limits<double>::infinity();
    plan.best_history.clear();

    std::vector<rollout::RolloutRequest> requests(static_cast<std::size_t>(n));
    for (int i = 0; i < config_.n_iter; ++i) {
      // perturb (or, for cem, re-sample) the population
      for (int c = 0; c < n; ++c) {
        RngStream stream(derive_stream(plan.master_seed,
                                       static_cast<std::uint64_t>(plan.plan_step),
                                       kNoiseSalt + static_cast<std::uint64_t>(i),
                                       static_cast<std::uint64_t>(c)));
        auto mu = plan.mu_of(c);
        if (cem) {
          for (std::size_t j = 0; j < mu.size(); ++j) {
            mu[j] = cem_mean[j] + cem_std[j] * stream.normal();
          }
        } else {
          const double f_n = config_.masked_noise() ? config_.f_n : 1.0;
          add_masked_noise(mu, tau, ad, f_n, config_.sigma_n, stream);
        }
      }

      // couple and evaluate
      for (int c = 0; c < n; ++c) {
        double* row = plan.actions.data() + static_cast<std::size_t>(c) * (tau + 1) * ad;
        std::copy(a_prev.components.begin(), a_prev.components.end(), row);
        couple_actions(plan.mu_of(c), {row, static_cast<std::size_t>(ad)}, config_.beta,
                       tau, ad, {row + ad, static_cast<std::size_t>(tau) * ad});
        requests[static_cast<std::size_t>(c)] = {
            current, {row + ad, static_cast<std::size_t>(tau) * ad}, c};
      }
      const auto results = engine_->evaluate_batch(prototype, requests);
      for (int c = 0; c < n; ++c) {
        plan.returns[static_cast<std::size_t>(c)] = results[static_cast<std::size_t>(c)].total_return;
      }

      // best-ever bookkeeping (ties keep the earlier find)
      int arg = 0;
      for (int c = 1; c < n; ++c) {
        if (plan.returns[static_cast<std::size_t>(c)] > plan.returns[static_cast<std::size_t>(arg)]) arg = c;
      }
      if (plan.returns[static_cast<std::size_t>(arg)] > plan.best_return) {
        plan.best_return = plan.returns[static_cast<std::size_t>(arg)];
        const auto src = plan.mu_of(arg);
        std::copy(src.begin(), src.end(), plan.best_mu.begin());
      }
      plan.best_history.push_back(plan.best_return);

      // selection
      if (cem) {
        cem_fit(plan.mu.data(), n, tau * ad, plan.returns, config_.f_b, cem_mean, cem_std);
      } else if (elite) {
        const auto dup = select_elites(plan.returns, config_.f_b);
        for (int c = 0; c < n; ++c) {
          const auto src = plan.mu_of(dup[static_cast<std::size_t>(c)]);
          std::copy(src.begin(), src.end(),
                    scratch.begin() + static_cast<std::size_t>(c) * tau * ad);
        }
        plan.mu.swap(scratch);
      } else {
        mppi_update(plan.mu.data(), n, tau * ad, plan.returns, config_.kappa, mean_mu);
        for (int c = 0; c < n; ++c) {
          auto mu = plan.mu_of(c);
          std::copy(mean_mu.begin(), mean_mu.end(), mu.begin());
        }
      }
    }

    // the executed action comes from the best-ever sequence (elite mode) or
    // from the final fitted/averaged mean
    const double* chosen = elite ? plan.best_mu.data() : (cem ? cem_mean.data() : mean_mu.data());
    Action executed;
    executed.components.resize(static_cast<std::size_t>(ad));
    for (int d = 0; d < ad; ++d) {
      executed.components[static_cast<std::size_t>(d)] = std::clamp(
          config_.beta * chosen[d] + (1.0 - config_.beta) * a_prev.components[static_cast<std::size_t>(d)],
          -1.0, 1.0);
    }

    if (config_.warm_start()) {
      plan.warm_mu.resize(static_cast<std::size_t>(tau) * ad);
      RngStream stream(derive_stream(plan.master_seed,
                                     static_cast<std::uint64_t>(plan.plan_step), kWarmSalt));
      warm_start_shift({chosen, static_cast<std::size_t>(tau) * ad}, tau, ad,
                       config_.sigma_i, stream, plan.warm_mu);
      plan.has_warm = true;
    } else {
      plan.has_warm = false;
    }
    ++plan.plan_step;
    return executed;
  }

  // Full MPC loop: plan, execute one action, record, repeat. Records the
  // executed episode as a demo trajectory (states/observations have length
  // T+1, actions/rewards length T). Success is goal achievement at the final
  // step for goal-based envs.
  demos::DemoTrajectory run_episode(Environment& env, std::uint64_t seed,
                                    int episode_length = -1) {
    const int steps = episode_length > 0 ? episode_length : env.episode_length();
    demos::DemoTrajectory demo;
    demo.env_id = env.id();
    demo.seed = seed;
    demo.planner_config = config_;

    Observation obs = env.reset(seed);
    PlanState plan = make_state(env, seed);
    demo.states.push_back(env.snapshot());
    demo.observations.push_back(std::move(obs));

    Action a_prev;
    a_prev.components.assign(static_cast<std::size_t>(env.action_dim()), 0.0);
    StepResult result;
    for (int t = 0; t < steps; ++t) {
      const Action act = plan_action(env, env.snapshot(), a_prev, plan);
      result = env.step(act);
      demo.actions.push_back(act.components);
      demo.rewards.push_back(result.reward);
      demo.total_return += result.reward;
      demo.states.push_back(env.snapshot());
      demo.observations.push_back(result.observation);
      a_prev = act;
    }
    demo.success = env.goal_based() ? result.success : false;
    return demo;
  }

  // Stream-derivation salts; part of the planner's reproducibility contract
  // (per-(planning step, iteration, candidate) streams off the master seed).
  static constexpr std::uint64_t kInitSalt = 0x696e6974ULL;
  static constexpr std::uint64_t kWarmSalt = 0x7761726dULL;
  static constexpr std::uint64_t kNoiseSalt = 0x100000000ULL;

 private:

  void initialize_population(PlanState& plan) {
    const int n = config_.n_traj;
    if (config_.mode == PlannerMode::kCem) {
      // cem re-samples every iteration from its fitted distribution; the
      // population needs no separate initialization.
      return;
    }
    if (config_.warm_start() && plan.has_warm) {
      for (int c = 0; c < n; ++c) {
        auto mu = plan.mu_of(c);
        std::copy(plan.warm_mu.begin(), plan.warm_mu.end(), mu.begin());
      }
      return;
    }
    for (int c = 0; c < n; ++c) {
      RngStream stream(derive_stream(plan.master_seed,
                                     static_cast<std::uint64_t>(plan.plan_step), kInitSalt,
                                     static_cast<std::uint64_t>(c)));
      auto mu = plan.mu_of(c);
      for (double& x : mu) x = config_.sigma_i * stream.normal();
    }
  }

  PlannerConfig config_;
  rollout::RolloutEngine* engine_;
};

}  // namespace trajlab::planner
