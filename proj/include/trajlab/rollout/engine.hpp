#pragma once

#include <algorithm>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "trajlab/contract.hpp"
#include "trajlab/env.hpp"

namespace trajlab::rollout {

struct RolloutRequest {
  EnvState start_state;
  // horizon x action_dim coupled action sequence, row-major.
  std::span<const double> actions;
  int candidate_index = 0;
};

struct RolloutResult {
  double total_return = 0.0;  // undiscounted sum over the horizon
  int candidate_index = 0;
};

// Parallel, deterministic evaluation of candidate action sequences. Each
// worker owns a private env replica cloned from the prototype; work is
// partitioned into contiguous candidate ranges (no stealing) and results are
// written by request slot, so results are bit-identical for any worker count
// and always come back sorted by candidate_index order of the input.
class RolloutEngine {
 public:
  explicit RolloutEngine(int num_workers = 1)
      : num_workers_(std::max(1, num_workers)) {}

  int num_workers() const { return num_workers_; }

  std::vector<RolloutResult> evaluate_batch(const Environment& prototype,
                                            const std::vector<RolloutRequest>& requests) {
    ensure_replicas(prototype);
    std::vector<RolloutResult> results(requests.size());
    if (requests.empty()) return results;

    const int workers =
        std::min<int>(num_workers_, static_cast<int>(requests.size()));
    if (workers == 1) {
      run_range(*replicas_[0], requests, 0, requests.size(), results);
      return results;
    }

    struct WorkerError {
      int candidate_index = std::numeric_limits<int>::max();
      std::exception_ptr error;
    };
    std::vector<WorkerError> errors(workers);
    const std::size_t chunk = (requests.size() + workers - 1) / workers;
    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    auto run_chunk = [&](int w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(requests.size(), begin + chunk);
      try {
        run_range(*replicas_[w], requests, begin, end, results);
      } catch (...) {
        errors[w].candidate_index =
            begin < requests.size() ? requests[begin].candidate_index : 0;
        errors[w].error = std::current_exception();
      }
    };
    for (int w = 1; w < workers; ++w) threads.emplace_back(run_chunk, w);
    run_chunk(0);
    for (auto& t : threads) t.join();

    // Report the failure with the lowest candidate index, if any.
    const WorkerError* first = nullptr;
    for (const auto& e : errors) {
      if (e.error && (!first || e.candidate_index < first->candidate_index)) first = &e;
    }
    if (first) std::rethrow_exception(first->error);
    return results;
  }

 private:
  void ensure_replicas(const Environment& prototype) {
    if (replica_id_ != prototype.id() ||
        static_cast<int>(replicas_.size()) < num_workers_) {
      replicas_.clear();
      replicas_.reserve(num_workers_);
      for (int i = 0; i < num_workers_; ++i) replicas_.push_back(prototype.clone());
      replica_id_ = prototype.id();
    }
  }

  static void run_range(Environment& env, const std::vector<RolloutRequest>& requests,
                        std::size_t begin, std::size_t end,
                        std::vector<RolloutResult>& results) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& req = requests[i];
      const int ad = env.action_dim();
      check_contract(ad > 0 && req.actions.size() % ad == 0,
                     "rollout: action buffer not a multiple of action_dim (candidate " +
                         std::to_string(req.candidate_index) + ")");
      env.restore(req.start_state);
      double total = 0.0;
      const int horizon = static_cast<int>(req.actions.size()) / ad;
      for (int s = 0; s < horizon; ++s) {
        total += env.step_lean(req.actions.subspan(static_cast<std::size_t>(s) * ad, ad));
      }
      results[i].total_return = total;
      results[i].candidate_index = req.candidate_index;
    }
  }

  int num_workers_;
  std::vector<std::unique_ptr<Environment>> replicas_;
  std::string replica_id_;
};

}  // namespace trajlab::rollout
