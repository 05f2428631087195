#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "trajlab/demo/trajectory.hpp"
#include "trajlab/rng.hpp"

namespace trajlab::demos {

struct RestartPoint {
  const EnvState* state = nullptr;
  const Observation* observation = nullptr;
  // The demo's recorded action at the sampled timestep; used as a_prev so a
  // restarted policy stays coupled to the demonstrated action sequence.
  const std::vector<double>* prev_action = nullptr;
  int trajectory_index = 0;
  int timestep = 0;
};

// Read-only collection of demos with uniform sampling over all
// (trajectory, timestep) pairs with timestep < T.
class DemoStore {
 public:
  DemoStore() = default;

  void add(DemoTrajectory demo) {
    const int t = demo.length();
    const int index = static_cast<int>(trajectories_.size());
    trajectories_.push_back(std::move(demo));
    for (int s = 0; s < t; ++s) pairs_.emplace_back(index, s);
  }

  // Loads every *.demo file under `dir` (recursively), sorted by path so the
  // store layout is independent of directory enumeration order.
  static DemoStore load_directory(const std::filesystem::path& dir,
                                  bool (*known_env)(const std::string&) = nullptr) {
    if (!std::filesystem::is_directory(dir)) {
      throw ConfigError("demo directory '" + dir.string() + "' does not exist");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".demo") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    DemoStore store;
    for (const auto& f : files) store.add(load_demo(f, known_env));
    return store;
  }

  bool empty() const { return pairs_.empty(); }
  std::size_t size() const { return trajectories_.size(); }
  std::size_t num_restart_points() const { return pairs_.size(); }
  const std::vector<DemoTrajectory>& trajectories() const { return trajectories_; }

  RestartPoint sample_restart(RngStream& rng) const {
    check_contract(!pairs_.empty(), "sample_restart: demo store is empty");
    const auto& [traj, t] = pairs_[static_cast<std::size_t>(
        rng.uniform_int(static_cast<int>(pairs_.size())))];
    const auto& demo = trajectories_[static_cast<std::size_t>(traj)];
    RestartPoint point;
    point.state = &demo.states[static_cast<std::size_t>(t)];
    point.observation = &demo.observations[static_cast<std::size_t>(t)];
    point.prev_action = &demo.actions[static_cast<std::size_t>(t)];
    point.trajectory_index = traj;
    point.timestep = t;
    return point;
  }

 private:
  std::vector<DemoTrajectory> trajectories_;
  std::vector<std::pair<int, int>> pairs_;
};

}  // namespace trajlab::demos
