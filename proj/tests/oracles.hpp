// Independent oracles used by the unit and acceptance suites. Everything
// here is deliberately written straight-line, without reusing the library's
// implementation paths, so the two routes check each other.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "trajlab/env.hpp"
#include "trajlab/planner/config.hpp"
#include "trajlab/planner/planner.hpp"
#include "trajlab/rl/config.hpp"
#include "trajlab/rl/replay_buffer.hpp"
#include "trajlab/rl/td3.hpp"
#include "trajlab/rng.hpp"

namespace oracles {

// ----------------------------------------------------------------- lqr ----

// Exact optimal return of the double-integrator task: finite-horizon
// discrete Riccati recursion for x' = Ax + Bu, stage cost x'Qx + Ru^2
// charged on the pre-step state, no terminal cost.
inline double riccati_optimal_return(double x0, double v0, int horizon) {
  const double dt = trajlab::kDt;
  const std::array<std::array<double, 2>, 2> A = {{{1.0, dt}, {0.0, 1.0}}};
  const std::array<double, 2> B = {dt * dt, dt};
  const std::array<double, 2> q_diag = {1.0, 0.1};
  const double R = 0.01;

  std::array<std::array<double, 2>, 2> P = {{{0.0, 0.0}, {0.0, 0.0}}};
  for (int t = 0; t < horizon; ++t) {
    // PB, S = R + B'PB, K = S^-1 B'PA
    const std::array<double, 2> pb = {P[0][0] * B[0] + P[0][1] * B[1],
                                      P[1][0] * B[0] + P[1][1] * B[1]};
    const double S = R + B[0] * pb[0] + B[1] * pb[1];
    // B'PA (row vector)
    std::array<double, 2> bpa = {0.0, 0.0};
    for (int j = 0; j < 2; ++j) {
      for (int i = 0; i < 2; ++i) bpa[j] += (B[0] * P[0][i] + B[1] * P[1][i]) * A[i][j];
    }
    const std::array<double, 2> K = {bpa[0] / S, bpa[1] / S};
    // P <- Q + A'PA - A'PB K
    std::array<std::array<double, 2>, 2> ap = {{{0.0, 0.0}, {0.0, 0.0}}};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) ap[i][j] += A[k][i] * P[k][j];
      }
    }
    std::array<std::array<double, 2>, 2> next = {{{0.0, 0.0}, {0.0, 0.0}}};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        double apa = 0.0;
        for (int k = 0; k < 2; ++k) apa += ap[i][k] * A[k][j];
        const double apb_i = ap[i][0] * B[0] + ap[i][1] * B[1];
        next[i][j] = (i == j ? q_diag[i] : 0.0) + apa - apb_i * K[j];
      }
    }
    P = next;
  }
  const double cost = P[0][0] * x0 * x0 + (P[0][1] + P[1][0]) * x0 * v0 + P[1][1] * v0 * v0;
  return -cost;
}

// ------------------------------------------------------- planner pieces ----

// Naive exponentially weighted average without the max-return shift.
inline std::vector<double> softmax_average(const std::vector<std::vector<double>>& mus,
                                           const std::vector<double>& returns, double kappa) {
  const std::size_t rows = mus.front().size();
  std::vector<double> out(rows, 0.0);
  double denom = 0.0;
  for (std::size_t n = 0; n < mus.size(); ++n) {
    const double w = std::exp(kappa * returns[n]);
    denom += w;
    for (std::size_t j = 0; j < rows; ++j) out[j] += w * mus[n][j];
  }
  for (double& x : out) x /= denom;
  return out;
}

// Brute-force elite duplication: sort candidate ids by (return desc, id asc)
// with plain std::sort, then deal copies round-robin style by rank.
inline std::vector<int> sort_and_fill(const std::vector<double>& returns, double f_b) {
  const int n = static_cast<int>(returns.size());
  const int k = std::min(n, static_cast<int>(std::ceil(f_b * n)));
  std::vector<int> ids(returns.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    if (returns[a] != returns[b]) return returns[a] > returns[b];
    return a < b;
  });
  std::vector<int> plan;
  for (int j = 0; j < k; ++j) {
    int copies = n / k;
    if (j < n % k) ++copies;
    for (int c = 0; c < copies; ++c) plan.push_back(ids[j]);
  }
  return plan;
}

// Straight-line MPPI exactly as described for the baseline: initialise the
// population from N(0, sigma_i), then per iteration add full-dimension noise,
// couple, evaluate serially, and take the exponentially weighted average as
// the new mean broadcast to every slot. Uses the library's stream-derivation
// discipline (same salts) but none of its planner code.
inline std::vector<double> straight_line_mppi_action(
    trajlab::Environment& env, const trajlab::EnvState& start,
    const std::vector<double>& a_prev, const trajlab::planner::PlannerConfig& cfg,
    std::uint64_t master_seed, int plan_step) {
  using trajlab::RngStream;
  using trajlab::derive_stream;
  using trajlab::planner::Planner;
  const int ad = static_cast<int>(a_prev.size());
  const int n = cfg.n_traj;
  const int tau = cfg.tau;

  std::vector<std::vector<double>> mu(static_cast<std::size_t>(n),
                                      std::vector<double>(static_cast<std::size_t>(tau) * ad));
  for (int c = 0; c < n; ++c) {
    RngStream rng(derive_stream(master_seed, static_cast<std::uint64_t>(plan_step),
                                Planner::kInitSalt, static_cast<std::uint64_t>(c)));
    for (auto& x : mu[static_cast<std::size_t>(c)]) x = cfg.sigma_i * rng.normal();
  }

  std::vector<double> mean(static_cast<std::size_t>(tau) * ad, 0.0);
  for (int i = 0; i < cfg.n_iter; ++i) {
    for (int c = 0; c < n; ++c) {
      RngStream rng(derive_stream(master_seed, static_cast<std::uint64_t>(plan_step),
                                  Planner::kNoiseSalt + static_cast<std::uint64_t>(i),
                                  static_cast<std::uint64_t>(c)));
      for (auto& x : mu[static_cast<std::size_t>(c)]) x += cfg.sigma_n * rng.normal();
    }
    std::vector<double> returns(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
      std::vector<double> action(a_prev);
      env.restore(start);
      double total = 0.0;
      for (int s = 0; s < tau; ++s) {
        for (int d = 0; d < ad; ++d) {
          action[static_cast<std::size_t>(d)] =
              cfg.beta * mu[static_cast<std::size_t>(c)][static_cast<std::size_t>(s) * ad + d] +
              (1.0 - cfg.beta) * action[static_cast<std::size_t>(d)];
        }
        total += env.step_lean(action);
      }
      returns[static_cast<std::size_t>(c)] = total;
    }
    double max_return = returns[0];
    for (double r : returns) max_return = std::max(max_return, r);
    std::fill(mean.begin(), mean.end(), 0.0);
    double denom = 0.0;
    for (int c = 0; c < n; ++c) {
      const double w = std::exp(cfg.kappa * (returns[static_cast<std::size_t>(c)] - max_return));
      denom += w;
      for (std::size_t j = 0; j < mean.size(); ++j) {
        mean[j] += w * mu[static_cast<std::size_t>(c)][j];
      }
    }
    for (double& x : mean) x /= denom;
    for (int c = 0; c < n; ++c) mu[static_cast<std::size_t>(c)] = mean;
  }

  std::vector<double> action(static_cast<std::size_t>(ad));
  for (int d = 0; d < ad; ++d) {
    action[static_cast<std::size_t>(d)] = std::clamp(
        cfg.beta * mean[static_cast<std::size_t>(d)] + (1.0 - cfg.beta) * a_prev[static_cast<std::size_t>(d)],
        -1.0, 1.0);
  }
  return action;
}

// ------------------------------------------------------------ naive nn ----

// Scalar-loop evaluator over the library's flat parameter layout
// ([W0, b0, W1, b1, ...], W row-major out x in). Shares no code with the
// batched kernels.
struct NaiveNet {
  std::vector<int> sizes;
  bool tanh_output = false;
  std::vector<double> params;

  std::size_t weight_offset(int layer) const {
    std::size_t off = 0;
    for (int l = 0; l < layer; ++l) {
      off += static_cast<std::size_t>(sizes[l + 1]) * sizes[l] + sizes[l + 1];
    }
    return off;
  }

  // Returns per-layer post-activations; acts[0] is the input.
  std::vector<std::vector<double>> forward(const std::vector<double>& input) const {
    std::vector<std::vector<double>> acts = {input};
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const int fan_in = sizes[l];
      const int fan_out = sizes[l + 1];
      const double* w = params.data() + weight_offset(static_cast<int>(l));
      const double* b = w + static_cast<std::size_t>(fan_out) * fan_in;
      std::vector<double> y(static_cast<std::size_t>(fan_out));
      for (int o = 0; o < fan_out; ++o) {
        double acc = b[o];
        for (int i = 0; i < fan_in; ++i) acc += w[static_cast<std::size_t>(o) * fan_in + i] * acts.back()[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(o)] = acc;
      }
      const bool last = l + 2 == sizes.size();
      for (double& v : y) {
        if (last) {
          if (tanh_output) v = std::tanh(v);
        } else {
          v = v > 0.0 ? v : 0.0;
        }
      }
      acts.push_back(std::move(y));
    }
    return acts;
  }

  // Accumulates parameter gradients; returns dL/dinput.
  std::vector<double> backward(const std::vector<std::vector<double>>& acts,
                               std::vector<double> delta, std::vector<double>& grad) const {
    for (int l = static_cast<int>(sizes.size()) - 2; l >= 0; --l) {
      const int fan_in = sizes[static_cast<std::size_t>(l)];
      const int fan_out = sizes[static_cast<std::size_t>(l) + 1];
      const auto& y = acts[static_cast<std::size_t>(l) + 1];
      const bool last = l == static_cast<int>(sizes.size()) - 2;
      for (int o = 0; o < fan_out; ++o) {
        if (last) {
          if (tanh_output) delta[static_cast<std::size_t>(o)] *= 1.0 - y[static_cast<std::size_t>(o)] * y[static_cast<std::size_t>(o)];
        } else if (y[static_cast<std::size_t>(o)] <= 0.0) {
          delta[static_cast<std::size_t>(o)] = 0.0;
        }
      }
      double* gw = grad.data() + weight_offset(l);
      double* gb = gw + static_cast<std::size_t>(fan_out) * fan_in;
      const double* w = params.data() + weight_offset(l);
      std::vector<double> prev(static_cast<std::size_t>(fan_in), 0.0);
      for (int o = 0; o < fan_out; ++o) {
        gb[o] += delta[static_cast<std::size_t>(o)];
        for (int i = 0; i < fan_in; ++i) {
          gw[static_cast<std::size_t>(o) * fan_in + i] +=
              delta[static_cast<std::size_t>(o)] * acts[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)];
          prev[static_cast<std::size_t>(i)] += delta[static_cast<std::size_t>(o)] * w[static_cast<std::size_t>(o) * fan_in + i];
        }
      }
      delta = std::move(prev);
    }
    return delta;
  }
};

inline void naive_adam(std::vector<double>& params, const std::vector<double>& grad,
                       std::vector<double>& m, std::vector<double>& v, std::int64_t step,
                       double lr, double b1 = 0.9, double b2 = 0.999, double eps = 1e-8) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
    v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
    const double mhat = m[i] / (1.0 - std::pow(b1, static_cast<double>(step)));
    const double vhat = v[i] / (1.0 - std::pow(b2, static_cast<double>(step)));
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

// ------------------------------------------------------ straight TD3 ----

struct NaiveTd3Result {
  double critic1_loss = 0.0;
  double critic2_loss = 0.0;
  double actor_loss = 0.0;
  bool policy_updated = false;
  std::vector<double> actor_params, critic1_params, critic2_params;
  std::vector<double> actor_target_params, critic1_target_params, critic2_target_params;
};

// One TD3 update written as per-sample loops over naive nets. Consumes the
// given RNG stream in the same order as the library (batch indices, then one
// clipped normal per (sample, action dim)) and applies naive Adam.
inline NaiveTd3Result straight_line_td3_update(
    const trajlab::rl::Td3Agent& agent, const trajlab::rl::ReplayBuffer& buffer,
    const trajlab::rl::Td3Config& cfg, trajlab::RngStream rng,
    std::int64_t update_index /* 1-based, matches agent.update_count after the call */) {
  const int od = agent.obs_dim;
  const int ad = agent.action_dim;
  const int batch = cfg.batch_size;

  auto to_naive = [](const trajlab::nn::Mlp& net) {
    NaiveNet n;
    n.sizes = net.sizes();
    n.tanh_output = net.output_activation() == trajlab::nn::OutputActivation::kTanh;
    n.params = net.params();
    return n;
  };
  NaiveNet actor = to_naive(agent.actor);
  NaiveNet critic1 = to_naive(agent.critic1);
  NaiveNet critic2 = to_naive(agent.critic2);
  NaiveNet actor_t = to_naive(agent.actor_target);
  NaiveNet critic1_t = to_naive(agent.critic1_target);
  NaiveNet critic2_t = to_naive(agent.critic2_target);

  std::vector<std::size_t> idx(static_cast<std::size_t>(batch));
  for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(buffer.size())));

  auto vec = [](std::span<const double> s) { return std::vector<double>(s.begin(), s.end()); };

  // targets
  std::vector<std::vector<double>> target_actions(static_cast<std::size_t>(batch));
  for (int b = 0; b < batch; ++b) {
    const auto next_obs = vec(buffer.next_obs_at(idx[static_cast<std::size_t>(b)]));
    const auto action = vec(buffer.action_at(idx[static_cast<std::size_t>(b)]));
    std::vector<double> in(next_obs);
    in.insert(in.end(), action.begin(), action.end());
    const auto mu = actor_t.forward(in).back();
    std::vector<double> ta(static_cast<std::size_t>(ad));
    for (int d = 0; d < ad; ++d) {
      const double eps =
          std::clamp(cfg.policy_noise * rng.normal(), -cfg.noise_clip, cfg.noise_clip);
      const double coupled = cfg.couple_target
                                 ? cfg.beta * mu[static_cast<std::size_t>(d)] +
                                       (1.0 - cfg.beta) * action[static_cast<std::size_t>(d)]
                                 : mu[static_cast<std::size_t>(d)];
      ta[static_cast<std::size_t>(d)] = std::clamp(coupled + eps, -1.0, 1.0);
    }
    target_actions[static_cast<std::size_t>(b)] = std::move(ta);
  }
  std::vector<double> y(static_cast<std::size_t>(batch));
  for (int b = 0; b < batch; ++b) {
    const auto i = idx[static_cast<std::size_t>(b)];
    std::vector<double> in = vec(buffer.next_obs_at(i));
    const auto action = vec(buffer.action_at(i));
    in.insert(in.end(), action.begin(), action.end());
    in.insert(in.end(), target_actions[static_cast<std::size_t>(b)].begin(),
              target_actions[static_cast<std::size_t>(b)].end());
    const double q1 = critic1_t.forward(in).back()[0];
    const double q2 = critic2_t.forward(in).back()[0];
    y[static_cast<std::size_t>(b)] =
        buffer.reward_at(i) + cfg.gamma * (1.0 - buffer.done_at(i)) * std::min(q1, q2);
  }

  NaiveTd3Result out;
  for (NaiveNet* critic : {&critic1, &critic2}) {
    std::vector<double> grad(critic->params.size(), 0.0);
    double loss = 0.0;
    for (int b = 0; b < batch; ++b) {
      const auto i = idx[static_cast<std::size_t>(b)];
      std::vector<double> in = vec(buffer.obs_at(i));
      const auto prev = vec(buffer.prev_action_at(i));
      const auto action = vec(buffer.action_at(i));
      in.insert(in.end(), prev.begin(), prev.end());
      in.insert(in.end(), action.begin(), action.end());
      const auto acts = critic->forward(in);
      const double err = acts.back()[0] - y[static_cast<std::size_t>(b)];
      loss += err * err;
      critic->backward(acts, {2.0 * err / batch}, grad);
    }
    loss /= batch;
    if (critic == &critic1) out.critic1_loss = loss;
    else out.critic2_loss = loss;
    // naive adam against the library's stored moments
    const auto& opt = critic == &critic1 ? agent.critic1_opt : agent.critic2_opt;
    std::vector<double> m = opt.m, v = opt.v;
    naive_adam(critic->params, grad, m, v, opt.step + 1, opt.learning_rate);
  }

  if (update_index % cfg.policy_frequency == 0) {
    std::vector<double> actor_grad(actor.params.size(), 0.0);
    double actor_loss = 0.0;
    for (int b = 0; b < batch; ++b) {
      const auto i = idx[static_cast<std::size_t>(b)];
      const auto obs = vec(buffer.obs_at(i));
      const auto prev = vec(buffer.prev_action_at(i));
      std::vector<double> ain(obs);
      ain.insert(ain.end(), prev.begin(), prev.end());
      const auto aacts = actor.forward(ain);
      const auto& mu = aacts.back();
      std::vector<double> cin(obs);
      cin.insert(cin.end(), prev.begin(), prev.end());
      for (int d = 0; d < ad; ++d) {
        cin.push_back(cfg.beta * mu[static_cast<std::size_t>(d)] +
                      (1.0 - cfg.beta) * prev[static_cast<std::size_t>(d)]);
      }
      const auto cacts = critic1.forward(cin);
      actor_loss -= cacts.back()[0];
      std::vector<double> sink(critic1.params.size(), 0.0);
      const auto din = critic1.backward(cacts, {-1.0 / batch}, sink);
      std::vector<double> dmu(static_cast<std::size_t>(ad));
      for (int d = 0; d < ad; ++d) {
        dmu[static_cast<std::size_t>(d)] = cfg.beta * din[static_cast<std::size_t>(od + ad + d)];
      }
      actor.backward(aacts, dmu, actor_grad);
    }
    out.actor_loss = actor_loss / batch;
    std::vector<double> m = agent.actor_opt.m, v = agent.actor_opt.v;
    naive_adam(actor.params, actor_grad, m, v, agent.actor_opt.step + 1,
               agent.actor_opt.learning_rate);
    const double rate = cfg.target_update_rate;
    for (std::size_t i = 0; i < actor_t.params.size(); ++i) {
      actor_t.params[i] = (1.0 - rate) * actor_t.params[i] + rate * actor.params[i];
    }
    for (std::size_t i = 0; i < critic1_t.params.size(); ++i) {
      critic1_t.params[i] = (1.0 - rate) * critic1_t.params[i] + rate * critic1.params[i];
      critic2_t.params[i] = (1.0 - rate) * critic2_t.params[i] + rate * critic2.params[i];
    }
    out.policy_updated = true;
  }

  out.actor_params = std::move(actor.params);
  out.critic1_params = std::move(critic1.params);
  out.critic2_params = std::move(critic2.params);
  out.actor_target_params = std::move(actor_t.params);
  out.critic1_target_params = std::move(critic1_t.params);
  out.critic2_target_params = std::move(critic2_t.params);
  return out;
}

}  // namespace oracles
