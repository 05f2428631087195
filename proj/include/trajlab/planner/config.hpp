#pragma once

#include <cmath>
#include <string>

#include "trajlab/contract.hpp"

namespace trajlab::planner {

enum class PlannerMode { kMppi, kCem, kTopdm };

inline std::string to_string(PlannerMode mode) {
  switch (mode) {
    case PlannerMode::kMppi: return "mppi";
    case PlannerMode::kCem: return "cem";
    case PlannerMode::kTopdm: return "topdm";
  }
  return "?";
}

inline PlannerMode planner_mode_from_string(const std::string& s) {
  if (s == "mppi") return PlannerMode::kMppi;
  if (s == "cem") return PlannerMode::kCem;
  if (s == "topdm") return PlannerMode::kTopdm;
  throw ConfigError("unknown planner mode '" + s + "'");
}

// Sampling-planner settings. Defaults follow the standard trajectory
// optimisation table: tau=20, N_i=20, N_t=1000, f_b=0.05, beta=0.7,
// sigma_i=0.9, sigma_n=0.3, f_n=0.3. The mod toggles select, for topdm mode,
// (1) elite duplication instead of the exponentially weighted mean update,
// (2) warm-starting each planning step from the previous best sequence, and
// (3) masked noise on ceil(f_n * a_d) dimensions per (candidate, step).
// With all three disabled, topdm is action-for-action identical to mppi.
struct PlannerConfig {
  int tau = 20;      // planning horizon
  int n_traj = 1000; // candidates per iteration
  int n_iter = 20;   // iterations per planning step
  double beta = 0.7; // action coupling
  double f_n = 0.3;  // fraction of noised action dimensions
  double f_b = 0.05; // elite fraction
  double sigma_i = 0.9;
  double sigma_n = 0.3;
  double kappa = 1.0;
  PlannerMode mode = PlannerMode::kTopdm;
  bool mod1 = true;
  bool mod2 = true;
  bool mod3 = true;

  bool elite_selection() const { return mode == PlannerMode::kTopdm && mod1; }
  bool warm_start() const { return mode == PlannerMode::kTopdm && mod2; }
  bool masked_noise() const { return mode == PlannerMode::kTopdm && mod3; }

  void validate() const {
    if (tau < 1) throw ConfigError("planner: tau must be >= 1");
    if (n_traj < 1) throw ConfigError("planner: n_traj must be >= 1");
    if (n_iter < 1) throw ConfigError("planner: n_iter must be >= 1");
    if (beta < 0.0 || beta > 1.0) throw ConfigError("planner: beta must be in [0, 1]");
    if (f_n < 0.0 || f_n > 1.0) throw ConfigError("planner: f_n must be in [0, 1]");
    if (f_b <= 0.0 || f_b > 1.0) throw ConfigError("planner: f_b must be in (0, 1]");
    if (std::ceil(f_b * n_traj) < 1.0) throw ConfigError("planner: ceil(f_b * n_traj) must be >= 1");
    if (sigma_i < 0.0 || sigma_n < 0.0) throw ConfigError("planner: noise std must be >= 0");
    if (mode == PlannerMode::kMppi && kappa <= 0.0) throw ConfigError("planner: kappa must be > 0");
  }
};

}  // namespace trajlab::planner
