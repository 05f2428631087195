#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "trajlab/nn/adam.hpp"
#include "trajlab/nn/mlp.hpp"
#include "trajlab/rl/config.hpp"
#include "trajlab/rl/replay_buffer.hpp"
#include "trajlab/rng.hpp"

namespace trajlab::rl {

// Actor mu(o, a_prev) -> tanh action mean; twin critics Q(o, a_prev, a).
struct Td3Agent {
  nn::Mlp actor, critic1, critic2;
  nn::Mlp actor_target, critic1_target, critic2_target;
  nn::AdamState actor_opt, critic1_opt, critic2_opt;
  int obs_dim = 0;
  int action_dim = 0;
  std::int64_t update_count = 0;

  Td3Agent(int obs_dim_in, int action_dim_in, int hidden, double lr, std::uint64_t seed)
      : actor({obs_dim_in + action_dim_in, hidden, hidden, action_dim_in},
              nn::OutputActivation::kTanh, derive_stream(seed, 1), 0.01),
        critic1({obs_dim_in + 2 * action_dim_in, hidden, hidden, 1},
                nn::OutputActivation::kIdentity, derive_stream(seed, 2)),
        critic2({obs_dim_in + 2 * action_dim_in, hidden, hidden, 1},
                nn::OutputActivation::kIdentity, derive_stream(seed, 3)),
        actor_target(actor),
        critic1_target(critic1),
        critic2_target(critic2),
        actor_opt(actor.params().size(), lr),
        critic1_opt(critic1.params().size(), lr),
        critic2_opt(critic2.params().size(), lr),
        obs_dim(obs_dim_in),
        action_dim(action_dim_in) {}
};

// Behavior policy: a = clamp(beta * mu(o, a_prev) + (1 - beta) * a_prev + eps),
// eps ~ N(0, exploration_noise) added before the clamp. exploration_noise = 0
// gives the deterministic evaluation policy.
inline std::vector<double> coupled_policy_action(const nn::Mlp& actor,
                                                 std::span<const double> obs,
                                                 std::span<const double> a_prev, double beta,
                                                 double exploration_noise, RngStream& rng) {
  std::vector<double> input(obs.size() + a_prev.size());
  std::copy(obs.begin(), obs.end(), input.begin());
  std::copy(a_prev.begin(), a_prev.end(), input.begin() + obs.size());
  std::vector<double> mu;
  actor.forward(input, mu);
  std::vector<double> action(mu.size());
  for (std::size_t d = 0; d < mu.size(); ++d) {
    double a = beta * mu[d] + (1.0 - beta) * a_prev[d];
    if (exploration_noise > 0.0) a += exploration_noise * rng.normal();
    action[d] = std::clamp(a, -1.0, 1.0);
  }
  return action;
}

struct Td3Losses {
  double critic1_loss = 0.0;
  double critic2_loss = 0.0;
  double actor_loss = 0.0;
  bool policy_updated = false;
};

// One TD3 update on a uniformly sampled batch:
//   target action a~ = clamp(beta * mu'(o', a) + (1 - beta) * a + clip(eps, +-c)),
//   y = r + gamma * (1 - done) * min(Q1'(o', a, a~), Q2'(o', a, a~)),
// both critics regress to y; every policy_frequency updates the actor
// ascends Q1 of its coupled action and the targets Polyak-average.
// Returns nullopt (no-op) while the buffer holds fewer than batch_size items.
inline std::optional<Td3Losses> td3_update(Td3Agent& agent, const ReplayBuffer& buffer,
                                           const Td3Config& config, RngStream& rng) {
  const int batch = config.batch_size;
  if (buffer.size() < static_cast<std::size_t>(batch)) return std::nullopt;

  const int od = agent.obs_dim;
  const int ad = agent.action_dim;
  ++agent.update_count;

  // gather the batch
  std::vector<double> obs(static_cast<std::size_t>(batch) * od);
  std::vector<double> prev_action(static_cast<std::size_t>(batch) * ad);
  std::vector<double> action(static_cast<std::size_t>(batch) * ad);
  std::vector<double> reward(static_cast<std::size_t>(batch));
  std::vector<double> next_obs(static_cast<std::size_t>(batch) * od);
  std::vector<double> done(static_cast<std::size_t>(batch));
  for (int b = 0; b < batch; ++b) {
    const std::size_t i = buffer.sample_index(rng);
    auto copy_to = [](std::span<const double> src, std::vector<double>& dst, std::size_t at) {
      std::copy(src.begin(), src.end(), dst.begin() + at);
    };
    copy_to(buffer.obs_at(i), obs, static_cast<std::size_t>(b) * od);
    copy_to(buffer.prev_action_at(i), prev_action, static_cast<std::size_t>(b) * ad);
    copy_to(buffer.action_at(i), action, static_cast<std::size_t>(b) * ad);
    reward[static_cast<std::size_t>(b)] = buffer.reward_at(i);
    copy_to(buffer.next_obs_at(i), next_obs, static_cast<std::size_t>(b) * od);
    done[static_cast<std::size_t>(b)] = buffer.done_at(i);
  }

  // target action: the next state's a_prev is the executed action
  std::vector<double> target_in(static_cast<std::size_t>(batch) * (od + ad));
  for (int b = 0; b < batch; ++b) {
    std::copy(next_obs.begin() + static_cast<std::size_t>(b) * od,
              next_obs.begin() + static_cast<std::size_t>(b + 1) * od,
              target_in.begin() + static_cast<std::size_t>(b) * (od + ad));
    std::copy(action.begin() + static_cast<std::size_t>(b) * ad,
              action.begin() + static_cast<std::size_t>(b + 1) * ad,
              target_in.begin() + static_cast<std::size_t>(b) * (od + ad) + od);
  }
  std::vector<double> target_mu(static_cast<std::size_t>(batch) * ad);
  agent.actor_target.forward_batch(target_in.data(), batch, target_mu.data());
  std::vector<double> target_action(static_cast<std::size_t>(batch) * ad);
  for (std::size_t j = 0; j < target_action.size(); ++j) {
    const double eps = std::clamp(config.policy_noise * rng.normal(), -config.noise_clip,
                                  config.noise_clip);
    const double coupled = config.couple_target
                               ? config.beta * target_mu[j] + (1.0 - config.beta) * action[j]
                               : target_mu[j];
    target_action[j] = std::clamp(coupled + eps, -1.0, 1.0);
  }

  // TD target through the minimum of the twin target critics
  auto critic_input = [&](const std::vector<double>& act) {
    std::vector<double> in(static_cast<std::size_t>(batch) * (od + 2 * ad));
    for (int b = 0; b < batch; ++b) {
      double* row = in.data() + static_cast<std::size_t>(b) * (od + 2 * ad);
      std::copy(next_obs.begin() + static_cast<std::size_t>(b) * od,
                next_obs.begin() + static_cast<std::size_t>(b + 1) * od, row);
      std::copy(action.begin() + static_cast<std::size_t>(b) * ad,
                action.begin() + static_cast<std::size_t>(b + 1) * ad, row + od);
      std::copy(act.begin() + static_cast<std::size_t>(b) * ad,
                act.begin() + static_cast<std::size_t>(b + 1) * ad, row + od + ad);
    }
    return in;
  };
  const std::vector<double> next_critic_in = critic_input(target_action);
  std::vector<double> q1_next(static_cast<std::size_t>(batch));
  std::vector<double> q2_next(static_cast<std::size_t>(batch));
  agent.critic1_target.forward_batch(next_critic_in.data(), batch, q1_next.data());
  agent.critic2_target.forward_batch(next_critic_in.data(), batch, q2_next.data());
  std::vector<double> td_target(static_cast<std::size_t>(batch));
  for (int b = 0; b < batch; ++b) {
    const std::size_t i = static_cast<std::size_t>(b);
    td_target[i] = reward[i] +
                   config.gamma * (1.0 - done[i]) * std::min(q1_next[i], q2_next[i]);
  }

  // critic regression
  std::vector<double> critic_in(static_cast<std::size_t>(batch) * (od + 2 * ad));
  for (int b = 0; b < batch; ++b) {
    double* row = critic_in.data() + static_cast<std::size_t>(b) * (od + 2 * ad);
    std::copy(obs.begin() + static_cast<std::size_t>(b) * od,
              obs.begin() + static_cast<std::size_t>(b + 1) * od, row);
    std::copy(prev_action.begin() + static_cast<std::size_t>(b) * ad,
              prev_action.begin() + static_cast<std::size_t>(b + 1) * ad, row + od);
    std::copy(action.begin() + static_cast<std::size_t>(b) * ad,
              action.begin() + static_cast<std::size_t>(b + 1) * ad, row + od + ad);
  }
  Td3Losses losses;
  nn::Mlp::Cache cache;
  std::vector<double> q(static_cast<std::size_t>(batch));
  std::vector<double> dq(static_cast<std::size_t>(batch));
  for (nn::Mlp* critic : {&agent.critic1, &agent.critic2}) {
    critic->forward_batch(critic_in.data(), batch, q.data(), &cache);
    double loss = 0.0;
    for (int b = 0; b < batch; ++b) {
      const std::size_t i = static_cast<std::size_t>(b);
      const double err = q[i] - td_target[i];
      loss += err * err;
      dq[i] = 2.0 * err / batch;
    }
    loss /= batch;
    auto grad = critic->zero_grad();
    critic->backward_batch(cache, dq.data(), grad);
    if (critic == &agent.critic1) {
      losses.critic1_loss = loss;
      nn::adam_step(critic->params(), grad, agent.critic1_opt);
    } else {
      losses.critic2_loss = loss;
      nn::adam_step(critic->params(), grad, agent.critic2_opt);
    }
  }

  // delayed policy + target updates
  if (agent.update_count % config.policy_frequency == 0) {
    std::vector<double> actor_in(static_cast<std::size_t>(batch) * (od + ad));
    for (int b = 0; b < batch; ++b) {
      double* row = actor_in.data() + static_cast<std::size_t>(b) * (od + ad);
      std::copy(obs.begin() + static_cast<std::size_t>(b) * od,
                obs.begin() + static_cast<std::size_t>(b + 1) * od, row);
      std::copy(prev_action.begin() + static_cast<std::size_t>(b) * ad,
                prev_action.begin() + static_cast<std::size_t>(b + 1) * ad, row + od);
    }
    nn::Mlp::Cache actor_cache;
    std::vector<double> mu(static_cast<std::size_t>(batch) * ad);
    agent.actor.forward_batch(actor_in.data(), batch, mu.data(), &actor_cache);

    // coupled policy action stays inside (-1, 1); no clamp in the loss path
    std::vector<double> pi_in(static_cast<std::size_t>(batch) * (od + 2 * ad));
    for (int b = 0; b < batch; ++b) {
      double* row = pi_in.data() + static_cast<std::size_t>(b) * (od + 2 * ad);
      std::copy(obs.begin() + static_cast<std::size_t>(b) * od,
                obs.begin() + static_cast<std::size_t>(b + 1) * od, row);
      std::copy(prev_action.begin() + static_cast<std::size_t>(b) * ad,
                prev_action.begin() + static_cast<std::size_t>(b + 1) * ad, row + od);
      for (int d = 0; d < ad; ++d) {
        const std::size_t j = static_cast<std::size_t>(b) * ad + d;
        row[od + ad + d] = config.beta * mu[j] + (1.0 - config.beta) * prev_action[j];
      }
    }
    nn::Mlp::Cache q_cache;
    agent.critic1.forward_batch(pi_in.data(), batch, q.data(), &q_cache);
    double actor_loss = 0.0;
    for (int b = 0; b < batch; ++b) {
      actor_loss -= q[static_cast<std::size_t>(b)];
      dq[static_cast<std::size_t>(b)] = -1.0 / batch;
    }
    losses.actor_loss = actor_loss / batch;

    std::vector<double> dq_in(pi_in.size());
    auto critic_grad_sink = agent.critic1.zero_grad();  // discarded
    agent.critic1.backward_batch(q_cache, dq.data(), critic_grad_sink, dq_in.data());
    std::vector<double> dmu(static_cast<std::size_t>(batch) * ad);
    for (int b = 0; b < batch; ++b) {
      for (int d = 0; d < ad; ++d) {
        dmu[static_cast<std::size_t>(b) * ad + d] =
            config.beta * dq_in[static_cast<std::size_t>(b) * (od + 2 * ad) + od + ad + d];
      }
    }
    auto actor_grad = agent.actor.zero_grad();
    agent.actor.backward_batch(actor_cache, dmu.data(), actor_grad);
    nn::adam_step(agent.actor.params(), actor_grad, agent.actor_opt);

    nn::polyak_update(agent.actor_target.params(), agent.actor.params(),
                      config.target_update_rate);
    nn::polyak_update(agent.critic1_target.params(), agent.critic1.params(),
                      config.target_update_rate);
    nn::polyak_update(agent.critic2_target.params(), agent.critic2.params(),
                      config.target_update_rate);
    losses.policy_updated = true;
  }
  return losses;
}

}  // namespace trajlab::rl
