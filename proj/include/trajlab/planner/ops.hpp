#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "trajlab/contract.hpp"
#include "trajlab/rng.hpp"

namespace trajlab::planner {

// a[s] = beta * mu[s] + (1 - beta) * a[s-1], seeded by a_prev. No clamping
// here; actions are clamped at the env boundary only.
inline void couple_actions(std::span<const double> mu, std::span<const double> a_prev,
                           double beta, int tau, int action_dim, std::span<double> out) {
  for (int d = 0; d < action_dim; ++d) {
    double prev = a_prev[d];
    for (int s = 0; s < tau; ++s) {
      prev = beta * mu[static_cast<std::size_t>(s) * action_dim + d] + (1.0 - beta) * prev;
      out[static_cast<std::size_t>(s) * action_dim + d] = prev;
    }
  }
}

// Adds N(0, sigma_n) noise to exactly ceil(f_n * a_d) distinct dimensions,
// independently chosen per timestep (selection sampling keeps the subset
// uniform without scratch storage). mu is one candidate: tau x a_d.
inline void add_masked_noise(std::span<double> mu, int tau, int action_dim, double f_n,
                             double sigma_n, RngStream& rng) {
  const int pick = static_cast<int>(std::ceil(f_n * action_dim));
  if (pick <= 0) return;
  for (int s = 0; s < tau; ++s) {
    double* row = mu.data() + static_cast<std::size_t>(s) * action_dim;
    if (pick >= action_dim) {
      for (int d = 0; d < action_dim; ++d) row[d] += sigma_n * rng.normal();
      continue;
    }
    int remaining = pick;
    for (int d = 0; d < action_dim && remaining > 0; ++d) {
      if (rng.uniform() * (action_dim - d) < remaining) {
        row[d] += sigma_n * rng.normal();
        --remaining;
      }
    }
  }
}

// Duplication plan for elite selection: the top k = ceil(f_b * N) candidates
// by return (ties broken by lower index), each duplicated floor(N/k) or
// ceil(N/k) times so the plan has exactly N entries. Earlier-ranked elites
// receive the extra copies.
inline std::vector<int> select_elites(std::span<const double> returns, double f_b) {
  const int n = static_cast<int>(returns.size());
  check_contract(n >= 1, "select_elites: empty returns");
  const int k = std::min(n, static_cast<int>(std::ceil(f_b * n)));
  check_contract(k >= 1, "select_elites: ceil(f_b * N) must be >= 1");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return returns[a] > returns[b]; });

  std::vector<int> plan;
  plan.reserve(n);
  const int base = n / k;
  const int extra = n % k;
  for (int j = 0; j < k; ++j) {
    const int copies = base + (j < extra ? 1 : 0);
    plan.insert(plan.end(), copies, order[j]);
  }
  return plan;
}

// Exponentially weighted average of the mean sequences:
//   mu = sum_n mu_n exp(kappa R_n) / sum_k exp(kappa R_k),
// with the max return subtracted inside the exponent, which makes the output
// invariant under translating all returns by a constant.
inline void mppi_update(const double* mus, int n, int rows, std::span<const double> returns,
                        double kappa, std::span<double> out) {
  check_contract(n >= 1, "mppi_update: empty population");
  check_contract(kappa > 0.0, "mppi_update: kappa must be > 0");
  double max_return = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) max_return = std::max(max_return, returns[i]);
  check_contract(std::isfinite(max_return), "mppi_update: no finite return in population");

  std::fill(out.begin(), out.end(), 0.0);
  double denom = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = std::exp(kappa * (returns[i] - max_return));
    denom += w;
    const double* mu = mus + static_cast<std::size_t>(i) * rows;
    for (int j = 0; j < rows; ++j) out[j] += w * mu[j];
  }
  for (int j = 0; j < rows; ++j) out[j] /= denom;
}

// Cross-entropy refit: per-coordinate mean and (population) standard
// deviation of the top ceil(f_b * N) candidates by return. The std gets a
// small floor so the sampling distribution never collapses entirely.
inline void cem_fit(const double* mus, int n, int rows, std::span<const double> returns,
                    double f_b, std::span<double> out_mean, std::span<double> out_std) {
  constexpr double kStdFloor = 1e-6;
  check_contract(n >= 1, "cem_fit: empty population");
  const int k = std::min(n, static_cast<int>(std::ceil(f_b * n)));
  check_contract(k >= 1, "cem_fit: ceil(f_b * N) must be >= 1");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return returns[a] > returns[b]; });

  std::fill(out_mean.begin(), out_mean.end(), 0.0);
  std::fill(out_std.begin(), out_std.end(), 0.0);
  for (int j = 0; j < k; ++j) {
    const double* mu = mus + static_cast<std::size_t>(order[static_cast<std::size_t>(j)]) * rows;
    for (int r = 0; r < rows; ++r) out_mean[r] += mu[r];
  }
  for (int r = 0; r < rows; ++r) out_mean[r] /= k;
  for (int j = 0; j < k; ++j) {
    const double* mu = mus + static_cast<std::size_t>(order[static_cast<std::size_t>(j)]) * rows;
    for (int r = 0; r < rows; ++r) {
      const double d = mu[r] - out_mean[r];
      out_std[r] += d * d;
    }
  }
  for (int r = 0; r < rows; ++r) out_std[r] = std::max(kStdFloor, std::sqrt(out_std[r] / k));
}

// Time-shift carry-over: out rows [0, tau-2] = best rows [1, tau-1]; the
// freed final row is drawn fresh from N(0, sigma_i).
inline void warm_start_shift(std::span<const double> best_mu, int tau, int action_dim,
                             double sigma_i, RngStream& rng, std::span<double> out) {
  const std::size_t row = static_cast<std::size_t>(action_dim);
  for (int s = 0; s + 1 < tau; ++s) {
    for (int d = 0; d < action_dim; ++d) {
      out[s * row + d] = best_mu[(s + 1) * row + d];
    }
  }
  for (int d = 0; d < action_dim; ++d) {
    out[static_cast<std::size_t>(tau - 1) * row + d] = sigma_i * rng.normal();
  }
}

}  // namespace trajlab::planner
