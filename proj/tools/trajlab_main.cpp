// Experiment runner: plans episodes, runs the planner ablation, trains
// TD3 (+ demo restarts), verifies demo files, and benchmarks the rollout
// engine. Every command is a pure function of (config file, flags, seeds);
// reruns are byte-identical with --no-timing.
//
// Exit codes: 0 success, 1 usage/config error, 2 runtime contract violation,
// 3 replay mismatch.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "trajlab/demo/store.hpp"
#include "trajlab/demo/trajectory.hpp"
#include "trajlab/envs/registry.hpp"
#include "trajlab/planner/planner.hpp"
#include "trajlab/rl/train.hpp"
#include "trajlab/rollout/engine.hpp"
#include "trajlab/util/config_file.hpp"

namespace {

namespace fs = std::filesystem;
using trajlab::ConfigError;
using trajlab::derive_stream;

struct Options {
  trajlab::cfg::ConfigFile file;
  std::string mode;
  std::vector<std::uint64_t> seeds;
  int episodes = 1;
  int workers = 1;
  fs::path out = "out";
  bool no_timing = false;
  std::optional<double> beta_override;
  std::string variant;
  std::vector<std::string> paths;
};

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double wall_since(const std::chrono::steady_clock::time_point& t0, bool no_timing) {
  if (no_timing) return 0.0;
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

trajlab::envs::EnvParams env_params_from(const trajlab::cfg::ConfigFile& c) {
  auto params = c.section("env");
  params.erase("id");
  return params;
}

std::unique_ptr<trajlab::Environment> env_from(const trajlab::cfg::ConfigFile& c) {
  const std::string id = c.get_string("env.id", "");
  if (id.empty()) throw ConfigError("config: missing env.id");
  return trajlab::envs::make_env(id, env_params_from(c));
}

trajlab::planner::PlannerConfig planner_config_from(const Options& opt) {
  const auto& c = opt.file;
  trajlab::planner::PlannerConfig p;
  p.mode = trajlab::planner::planner_mode_from_string(c.get_string("planner.mode", "topdm"));
  p.tau = static_cast<int>(c.get_int("planner.tau", p.tau));
  p.n_traj = static_cast<int>(c.get_int("planner.n_traj", p.n_traj));
  p.n_iter = static_cast<int>(c.get_int("planner.n_iter", p.n_iter));
  p.beta = c.get_double("planner.beta", p.beta);
  p.f_n = c.get_double("planner.f_n", p.f_n);
  p.f_b = c.get_double("planner.f_b", p.f_b);
  p.sigma_i = c.get_double("planner.sigma_i", p.sigma_i);
  p.sigma_n = c.get_double("planner.sigma_n", p.sigma_n);
  p.kappa = c.get_double("planner.kappa", p.kappa);
  p.mod1 = c.get_bool("planner.mod1", p.mod1);
  p.mod2 = c.get_bool("planner.mod2", p.mod2);
  p.mod3 = c.get_bool("planner.mod3", p.mod3);
  if (opt.beta_override) p.beta = *opt.beta_override;
  p.validate();
  return p;
}

trajlab::rl::Td3Config td3_config_from(const Options& opt) {
  const auto& c = opt.file;
  trajlab::rl::Td3Config t;
  t.start_timesteps = c.get_int("rl.start_timesteps", t.start_timesteps);
  t.total_timesteps = c.get_int("rl.total_timesteps", t.total_timesteps);
  t.exploration_noise = c.get_double("rl.exploration_noise", t.exploration_noise);
  t.batch_size = static_cast<int>(c.get_int("rl.batch_size", t.batch_size));
  t.gamma = c.get_double("rl.gamma", t.gamma);
  t.target_update_rate = c.get_double("rl.target_update_rate", t.target_update_rate);
  t.policy_noise = c.get_double("rl.policy_noise", t.policy_noise);
  t.noise_clip = c.get_double("rl.noise_clip", t.noise_clip);
  t.policy_frequency = static_cast<int>(c.get_int("rl.policy_frequency", t.policy_frequency));
  t.beta = c.get_double("rl.beta", t.beta);
  t.segment_length = static_cast<int>(c.get_int("rl.segment_length", t.segment_length));
  t.demo_restart_prob_init = c.get_double("rl.demo_restart_prob_init", t.demo_restart_prob_init);
  t.demo_restart_decay = c.get_double("rl.demo_restart_decay", t.demo_restart_decay);
  t.buffer_capacity = static_cast<std::size_t>(c.get_int("rl.buffer_capacity",
                                                         static_cast<std::int64_t>(t.buffer_capacity)));
  t.hidden_size = static_cast<int>(c.get_int("rl.hidden_size", t.hidden_size));
  t.learning_rate = c.get_double("rl.learning_rate", t.learning_rate);
  t.couple_target = c.get_bool("rl.couple_target", t.couple_target);
  t.eval_interval = c.get_int("rl.eval_interval", t.eval_interval);
  t.eval_episodes = static_cast<int>(c.get_int("rl.eval_episodes", t.eval_episodes));
  if (opt.beta_override) t.beta = *opt.beta_override;
  t.validate();
  return t;
}

std::uint64_t episode_seed(std::uint64_t seed, int episode) {
  return episode == 0 ? seed : derive_stream(seed, 0x6570ULL, static_cast<std::uint64_t>(episode));
}

fs::path demo_path(const fs::path& root, const std::string& env_id, std::uint64_t seed,
                   int episode) {
  const std::string name = episode == 0 ? std::to_string(seed) + ".demo"
                                        : std::to_string(seed) + "." + std::to_string(episode) +
                                              ".demo";
  return root / "demos" / env_id / name;
}

// ---------------------------------------------------------------- plan ----

struct SweepRow {
  std::uint64_t seed;
  int episode;
  double total_return;
  bool success;
  double wall_seconds;
};

std::vector<SweepRow> run_plan_sweep(trajlab::Environment& env,
                                     const trajlab::planner::PlannerConfig& pcfg,
                                     const Options& opt, const fs::path& out_dir) {
  trajlab::rollout::RolloutEngine engine(opt.workers);
  trajlab::planner::Planner planner(pcfg, engine);
  std::vector<SweepRow> rows;
  for (const std::uint64_t seed : opt.seeds) {
    for (int ep = 0; ep < opt.episodes; ++ep) {
      const auto t0 = std::chrono::steady_clock::now();
      auto demo = planner.run_episode(env, episode_seed(seed, ep));
      demo.env_params = env_params_from(opt.file);
      const double wall = wall_since(t0, opt.no_timing);
      trajlab::demos::save_demo(demo, demo_path(out_dir, env.id(), seed, ep));
      rows.push_back({seed, ep, demo.total_return, demo.success, wall});
    }
  }
  return rows;
}

void write_episode_csv(const fs::path& path, const std::vector<SweepRow>& rows) {
  fs::create_directories(path.parent_path());
  std::ofstream csv(path);
  csv << "seed,episode,return,success,plan_wall_seconds\n";
  for (const auto& r : rows) {
    csv << r.seed << ',' << r.episode << ',' << fmt_double(r.total_return) << ','
        << (r.success ? 1 : 0) << ',' << fmt_double(r.wall_seconds) << '\n';
  }
}

nlohmann::json summarize(const std::vector<SweepRow>& rows) {
  std::vector<double> returns;
  double successes = 0.0;
  for (const auto& r : rows) {
    returns.push_back(r.total_return);
    successes += r.success ? 1.0 : 0.0;
  }
  return {{"episodes", rows.size()},
          {"mean_return", mean_of(returns)},
          {"median_return", median_of(returns)},
          {"success_rate", rows.empty() ? 0.0 : successes / static_cast<double>(rows.size())}};
}

int cmd_plan(const Options& opt) {
  auto env = env_from(opt.file);
  const auto pcfg = planner_config_from(opt);
  const auto rows = run_plan_sweep(*env, pcfg, opt, opt.out);
  write_episode_csv(opt.out / "episodes.csv", rows);
  nlohmann::json summary = summarize(rows);
  summary["mode"] = "plan";
  summary["env_id"] = env->id();
  summary["planner_mode"] = trajlab::planner::to_string(pcfg.mode);
  std::ofstream(opt.out / "summary.json") << summary.dump(1) << '\n';
  std::cout << summary.dump(1) << '\n';
  return 0;
}

// -------------------------------------------------------------- ablate ----

struct AblationVariant {
  std::string name;
  bool mod1, mod2, mod3;
  bool mppi;
};

const std::vector<AblationVariant>& ablation_variants() {
  static const std::vector<AblationVariant> variants = {
      {"mppi", false, false, false, true},
      {"mod1", true, false, false, false},
      {"mod1+2", true, true, false, false},
      {"mod1+2+3", true, true, true, false},
  };
  return variants;
}

int cmd_ablate(const Options& opt) {
  auto env = env_from(opt.file);
  const auto base = planner_config_from(opt);
  std::ofstream combined;
  fs::create_directories(opt.out);
  combined.open(opt.out / "ablation.csv");
  combined << "variant,seed,episode,return,success\n";
  nlohmann::json summary;
  int groups = 0;
  for (const auto& variant : ablation_variants()) {
    if (!opt.variant.empty() && opt.variant != variant.name) continue;
    auto pcfg = base;
    pcfg.mode = variant.mppi ? trajlab::planner::PlannerMode::kMppi
                             : trajlab::planner::PlannerMode::kTopdm;
    pcfg.mod1 = variant.mod1;
    pcfg.mod2 = variant.mod2;
    pcfg.mod3 = variant.mod3;
    const fs::path vdir = opt.out / variant.name;
    const auto rows = run_plan_sweep(*env, pcfg, opt, vdir);
    write_episode_csv(vdir / "episodes.csv", rows);
    for (const auto& r : rows) {
      combined << variant.name << ',' << r.seed << ',' << r.episode << ','
               << fmt_double(r.total_return) << ',' << (r.success ? 1 : 0) << '\n';
    }
    summary[variant.name] = summarize(rows);
    ++groups;
  }
  if (groups == 0) throw ConfigError("ablate: unknown variant '" + opt.variant + "'");
  summary["env_id"] = env->id();
  std::ofstream(opt.out / "ablation.json") << summary.dump(1) << '\n';
  std::cout << summary.dump(1) << '\n';
  return 0;
}

// ------------------------------------------------------------ train-rl ----

int cmd_train_rl(const Options& opt) {
  auto env = env_from(opt.file);
  auto tcfg = td3_config_from(opt);
  const std::string demo_dir = opt.file.get_string("rl.demo_dir", "");

  trajlab::demos::DemoStore store;
  const trajlab::demos::DemoStore* store_ptr = nullptr;
  if (!demo_dir.empty()) {
    store = trajlab::demos::DemoStore::load_directory(demo_dir,
                                                      trajlab::envs::is_registered_env);
    if (store.empty()) throw ConfigError("train-rl: no .demo files under '" + demo_dir + "'");
    store_ptr = &store;
  } else {
    tcfg.demo_restart_prob_init = 0.0;
  }

  // Aggregate: median across seeds of each seed's eval median, per step.
  std::vector<std::vector<trajlab::rl::EvalPoint>> curves;
  for (const std::uint64_t seed : opt.seeds) {
    const fs::path seed_dir = opt.out / ("seed" + std::to_string(seed));
    auto replica = env->clone();
    const auto result =
        trajlab::rl::train(*replica, tcfg, store_ptr, seed, seed_dir, opt.no_timing);
    curves.push_back(result.curve);
  }

  std::ofstream agg(opt.out / "curve_median.csv");
  agg << "env_step,median_return,min_return,max_return\n";
  const std::size_t points = curves.front().size();
  for (std::size_t i = 0; i < points; ++i) {
    std::vector<double> vals;
    for (const auto& c : curves) vals.push_back(c[i].median_return);
    agg << curves.front()[i].env_step << ',' << fmt_double(median_of(vals)) << ','
        << fmt_double(*std::min_element(vals.begin(), vals.end())) << ','
        << fmt_double(*std::max_element(vals.begin(), vals.end())) << '\n';
  }

  nlohmann::json summary;
  summary["mode"] = "train-rl";
  summary["env_id"] = env->id();
  summary["seeds"] = opt.seeds;
  summary["demo_restarts"] = store_ptr != nullptr;
  std::vector<double> finals;
  for (const auto& c : curves) finals.push_back(c.back().median_return);
  summary["final_median_return"] = median_of(finals);
  std::ofstream(opt.out / "summary.json") << summary.dump(1) << '\n';
  std::cout << summary.dump(1) << '\n';
  return 0;
}

// --------------------------------------------------------- replay-demo ----

int cmd_replay_demo(const Options& opt) {
  std::vector<fs::path> files;
  for (const auto& p : opt.paths) {
    if (fs::is_directory(p)) {
      for (const auto& entry : fs::recursive_directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".demo") {
          files.push_back(entry.path());
        }
      }
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw ConfigError("replay-demo: no such file or directory '" + p + "'");
    }
  }
  if (files.empty()) throw ConfigError("replay-demo: no demo files given");
  std::sort(files.begin(), files.end());

  std::cout << "file,steps,recorded_return,replayed_return,max_reward_deviation,first_divergent_step\n";
  bool mismatch = false;
  int first_divergent = -1;
  for (const auto& f : files) {
    const auto demo = trajlab::demos::load_demo(f, trajlab::envs::is_registered_env);
    auto env = trajlab::envs::make_env(demo.env_id, demo.env_params);
    const auto report = trajlab::demos::replay_demo(demo, *env);
    std::cout << f.string() << ',' << demo.length() << ',' << fmt_double(demo.total_return)
              << ',' << fmt_double(report.replayed_return) << ','
              << fmt_double(report.max_reward_deviation) << ',' << report.first_divergent_step
              << '\n';
    if (report.first_divergent_step >= 0 && !mismatch) {
      mismatch = true;
      first_divergent = report.first_divergent_step;
    }
  }
  if (mismatch) {
    std::cerr << "replay mismatch: first divergence at step " << first_divergent << '\n';
    return 3;
  }
  return 0;
}

// --------------------------------------------------------------- bench ----

int cmd_bench(const Options& opt) {
  auto env = env_from(opt.file);
  const int n_traj = static_cast<int>(opt.file.get_int("bench.n_traj", 1000));
  const int tau = static_cast<int>(opt.file.get_int("bench.tau", 20));
  const int repeats = static_cast<int>(opt.file.get_int("bench.repeats", 5));

  env->reset(opt.seeds.front());
  const trajlab::EnvState start = env->snapshot();
  const int ad = env->action_dim();
  trajlab::RngStream rng(derive_stream(opt.seeds.front(), 0x62656e6368ULL));
  std::vector<double> actions(static_cast<std::size_t>(n_traj) * tau * ad);
  for (double& a : actions) a = rng.uniform(-1.0, 1.0);
  std::vector<trajlab::rollout::RolloutRequest> requests(static_cast<std::size_t>(n_traj));
  for (int c = 0; c < n_traj; ++c) {
    requests[static_cast<std::size_t>(c)] = {
        start,
        {actions.data() + static_cast<std::size_t>(c) * tau * ad,
         static_cast<std::size_t>(tau) * ad},
        c};
  }

  trajlab::rollout::RolloutEngine reference(1);
  const auto expected = reference.evaluate_batch(*env, requests);

  fs::create_directories(opt.out);
  std::ofstream csv(opt.out / "bench.csv");
  csv << "workers,batch_seconds,steps_per_second,bit_identical\n";
  std::cout << "workers,batch_seconds,steps_per_second,bit_identical\n";
  for (int w = 1; w <= opt.workers; w *= 2) {
    trajlab::rollout::RolloutEngine engine(w);
    engine.evaluate_batch(*env, requests);  // warm replicas
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<trajlab::rollout::RolloutResult> results;
    for (int r = 0; r < repeats; ++r) results = engine.evaluate_batch(*env, requests);
    const double dt = wall_since(t0, opt.no_timing) / repeats;
    bool identical = true;
    for (std::size_t i = 0; i < results.size(); ++i) {
      identical = identical && results[i].total_return == expected[i].total_return;
    }
    const double steps = static_cast<double>(n_traj) * tau;
    const std::string row = std::to_string(w) + "," + fmt_double(dt) + "," +
                            fmt_double(opt.no_timing || dt == 0.0 ? 0.0 : steps / dt) + "," +
                            (identical ? "1" : "0");
    csv << row << '\n';
    std::cout << row << '\n';
    if (!identical) throw trajlab::ContractViolation("bench: worker results differ");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trajlab experiment runner"};
  std::string config_path, mode, seed_csv, out_dir = "out", variant;
  int episodes = -1;
  int workers = -1;
  double beta = std::numeric_limits<double>::quiet_NaN();
  bool no_timing = false;
  std::vector<std::string> paths;

  app.add_option("--config", config_path, "config file");
  app.add_option("--mode", mode, "plan | ablate | train-rl | replay-demo | bench");
  app.add_option("--seed", seed_csv, "comma-separated seeds (overrides config)");
  app.add_option("--episodes", episodes, "episodes per seed");
  app.add_option("--workers", workers, "rollout worker count");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--beta", beta, "action-coupling override");
  app.add_option("--variant", variant, "ablate: single variant to run");
  app.add_flag("--no-timing", no_timing, "zero wall-clock fields in outputs");
  app.add_option("paths", paths, "demo files or directories (replay-demo)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    Options opt;
    if (!config_path.empty()) opt.file = trajlab::cfg::ConfigFile::parse_file(config_path);
    opt.mode = mode.empty() ? opt.file.get_string("run.mode", "") : mode;
    if (!seed_csv.empty()) opt.file.set("run.seeds", seed_csv);
    opt.seeds = opt.file.get_seed_list("run.seeds", {0});
    opt.episodes = episodes > 0 ? episodes
                                : static_cast<int>(opt.file.get_int("run.episodes", 1));
    opt.workers = workers > 0 ? workers : static_cast<int>(opt.file.get_int("run.workers", 1));
    opt.out = out_dir != "out" || !opt.file.has("run.out") ? out_dir
                                                           : opt.file.get_string("run.out", "out");
    opt.no_timing = no_timing;
    if (!std::isnan(beta)) opt.beta_override = beta;
    opt.variant = variant;
    opt.paths = paths;
    if (opt.episodes < 1) throw ConfigError("episodes must be >= 1");
    fs::create_directories(opt.out);

    if (opt.mode == "plan") return cmd_plan(opt);
    if (opt.mode == "ablate") return cmd_ablate(opt);
    if (opt.mode == "train-rl") return cmd_train_rl(opt);
    if (opt.mode == "replay-demo") return cmd_replay_demo(opt);
    if (opt.mode == "bench") return cmd_bench(opt);
    throw ConfigError(opt.mode.empty() ? "missing --mode"
                                       : "unknown mode '" + opt.mode + "'");
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const trajlab::ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 2;
  }
}
