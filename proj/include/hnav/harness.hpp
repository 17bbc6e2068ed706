#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hnav/checkpoint.hpp"
#include "hnav/config.hpp"
#include "hnav/ddpg.hpp"
#include "hnav/environment.hpp"
#include "hnav/replay.hpp"
#include "hnav/sac.hpp"

namespace hnav {

namespace fs = std::filesystem;

/// Shortest round-trip decimal form.
inline std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

// ---------------------------------------------------------------------------
// Statistics

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Population mean and standard deviation (divide by n); zeros when empty.
inline MeanStd population_stats(std::span<const double> xs) {
  if (xs.empty()) return {};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

/// Trailing moving average; early entries average over what is available.
inline std::vector<double> moving_average(std::span<const double> xs, int window) {
  std::vector<double> out(xs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    acc += xs[i];
    if (i >= static_cast<std::size_t>(window)) acc -= xs[i - static_cast<std::size_t>(window)];
    const std::size_t n = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
    out[i] = acc / static_cast<double>(n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation records

struct TrialResult {
  bool success = false;
  double t_air = 0.0;
  double t_under = 0.0;
  double duration = 0.0;
  int steps = 0;
  FailureCause cause = FailureCause::none;
};

struct EvalReport {
  int trials = 0;
  int successes = 0;
  double t_air_mean = 0.0, t_air_std = 0.0;
  double t_under_mean = 0.0, t_under_std = 0.0;
  int collisions = 0;
  int timeouts = 0;
  /// Time until the terminal event, over failed trials only.
  double fail_time_mean = 0.0, fail_time_std = 0.0;
  std::map<std::string, int> failure_causes;
  std::uint64_t seed = 0;
  std::string checkpoint;
  std::string policy;
  int scenario = 0;
  std::string route;
};

/// Times are aggregated over successful trials only; failures are split
/// into timeouts and collisions (any other terminal event).
inline EvalReport summarize(const std::vector<TrialResult>& trials) {
  EvalReport r;
  r.trials = static_cast<int>(trials.size());
  std::vector<double> air, under, fail;
  for (const TrialResult& t : trials) {
    if (t.success) {
      ++r.successes;
      air.push_back(t.t_air);
      under.push_back(t.t_under);
      continue;
    }
    fail.push_back(t.duration);
    ++r.failure_causes[to_string(t.cause)];
    if (t.cause == FailureCause::step_cap) {
      ++r.timeouts;
    } else {
      ++r.collisions;
    }
  }
  const MeanStd a = population_stats(air), u = population_stats(under), f = population_stats(fail);
  r.t_air_mean = a.mean;
  r.t_air_std = a.std;
  r.t_under_mean = u.mean;
  r.t_under_std = u.std;
  r.fail_time_mean = f.mean;
  r.fail_time_std = f.std;
  return r;
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["trials"] = r.trials;
  j["successes"] = r.successes;
  j["t_air_mean"] = r.t_air_mean;
  j["t_air_std"] = r.t_air_std;
  j["t_under_mean"] = r.t_under_mean;
  j["t_under_std"] = r.t_under_std;
  j["collisions"] = r.collisions;
  j["timeouts"] = r.timeouts;
  j["seed"] = r.seed;
  j["checkpoint"] = r.checkpoint;
  j["fail_time_mean"] = r.fail_time_mean;
  j["fail_time_std"] = r.fail_time_std;
  j["failure_causes"] = r.failure_causes;
  j["policy"] = r.policy;
  j["scenario"] = r.scenario;
  j["route"] = r.route;
  j["metadata"] = {{"std_convention", "population (divide by n)"},
                   {"time_population", "t_air/t_under over successful trials; fail_time over failed trials"}};
  return j;
}

struct TrajectoryRow {
  int step = 0;
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
  Action raw = Action::Zero();
  VelocityCommand command;
  double reward = 0.0;
  double min_range = 0.0;
  double target_distance = 0.0;
  double submerged = 0.0;
};

using Trajectory = std::vector<TrajectoryRow>;

struct ActionStatsRow {
  int step = 0;
  int count = 0;
  Action mean = Action::Zero();
  Action std = Action::Zero();
};

/// Per-step mean/std of the raw actions over the trials still running at that step.
inline std::vector<ActionStatsRow> action_statistics(const std::vector<std::vector<Action>>& per_trial) {
  std::size_t longest = 0;
  for (const auto& t : per_trial) longest = std::max(longest, t.size());
  std::vector<ActionStatsRow> rows;
  for (std::size_t k = 0; k < longest; ++k) {
    ActionStatsRow row;
    row.step = static_cast<int>(k + 1);
    for (int c = 0; c < kActionSize; ++c) {
      std::vector<double> xs;
      for (const auto& t : per_trial) {
        if (k < t.size()) xs.push_back(t[k][c]);
      }
      const MeanStd m = population_stats(xs);
      row.mean[c] = m.mean;
      row.std[c] = m.std;
      row.count = static_cast<int>(xs.size());
    }
    rows.push_back(row);
  }
  return rows;
}

struct EvalResult {
  EvalReport report;
  std::vector<TrialResult> trials;
  std::vector<Trajectory> trajectories;
  std::vector<ActionStatsRow> action_stats;
};

/// Runs `trials` episodes on a fixed route. `policy` maps an observation to a
/// raw action; when empty the baseline controller drives the vehicle.
/// A trial succeeds at its first arrival and fails at any terminal event.
inline EvalResult run_trials(const EnvConfig& cfg, int scenario, Route route, int trials, std::uint64_t seed,
                             const std::function<Action(const Observation&)>& policy) {
  EvalResult res;
  Environment env(scenario, cfg);
  std::vector<std::vector<Action>> actions;
  for (int i = 0; i < trials; ++i) {
    Observation obs = env.reset_evaluation(route, splitmix64(seed + static_cast<std::uint64_t>(i)));
    Trajectory traj;
    std::vector<Action> acts;
    TrialResult tr;
    for (;;) {
      Action raw = Action::Zero();
      StepOutcome out;
      if (policy) {
        raw = policy(obs);
        out = env.step(raw);
        acts.push_back(raw.cwiseMax(-1.0).cwiseMin(1.0));
      } else {
        out = env.step_baseline();
      }
      const RigidBodyState& s = env.state();
      traj.push_back({env.steps(), env.time(), s.position, s.yaw(), raw.cwiseMax(-1.0).cwiseMin(1.0),
                      env.last_command(), out.reward, out.min_range, out.target_distance, env.submerged()});
      obs = out.observation;
      if (out.arrived) {
        tr.success = true;
        break;
      }
      if (out.done) {
        tr.cause = out.cause;
        break;
      }
    }
    tr.t_air = env.t_air();
    tr.t_under = env.t_under();
    tr.duration = env.time();
    tr.steps = env.steps();
    res.trials.push_back(tr);
    res.trajectories.push_back(std::move(traj));
    if (policy) actions.push_back(std::move(acts));
  }
  res.report = summarize(res.trials);
  res.report.seed = seed;
  res.report.scenario = scenario;
  res.report.route = to_string(route);
  res.action_stats = action_statistics(actions);
  return res;
}

/// Deterministic policy evaluation: DDPG without noise, SAC with tanh(mean).
inline EvalResult evaluate(const AnyAgent& agent, const EnvConfig& cfg, int scenario, Route route, int trials,
                           std::uint64_t seed) {
  EvalResult r = std::visit(
      [&](const auto& a) {
        return run_trials(cfg, scenario, route, trials, seed,
                          [&a](const Observation& o) { return a.act_greedy(o); });
      },
      agent);
  r.report.policy = std::holds_alternative<DdpgAgent>(agent) ? "ddpg" : "sac";
  return r;
}

inline EvalResult run_baseline(const EnvConfig& cfg, int scenario, Route route, int trials, std::uint64_t seed = 0) {
  EvalResult r = run_trials(cfg, scenario, route, trials, seed, {});
  r.report.policy = "baseline";
  return r;
}

// ---------------------------------------------------------------------------
// Output files

inline void write_trajectory_csv(std::ostream& out, const Trajectory& t) {
  out << "step,t_s,x,y,z,yaw,raw_a0,raw_a1,raw_a2,v_fwd,v_z,dyaw,reward,min_range,dist_target,submerged_fraction\n";
  for (const auto& r : t) {
    out << r.step << ',' << fmt(r.t) << ',' << fmt(r.position.x()) << ',' << fmt(r.position.y()) << ','
        << fmt(r.position.z()) << ',' << fmt(r.yaw) << ',' << fmt(r.raw[0]) << ',' << fmt(r.raw[1]) << ','
        << fmt(r.raw[2]) << ',' << fmt(r.command.v_forward) << ',' << fmt(r.command.v_z) << ','
        << fmt(r.command.delta_yaw) << ',' << fmt(r.reward) << ',' << fmt(r.min_range) << ','
        << fmt(r.target_distance) << ',' << fmt(r.submerged) << '\n';
  }
}

inline void write_action_stats_csv(std::ostream& out, const std::vector<ActionStatsRow>& rows) {
  out << "step,count,a0_mean,a0_std,a1_mean,a1_std,a2_mean,a2_std\n";
  for (const auto& r : rows) {
    out << r.step << ',' << r.count;
    for (int c = 0; c < kActionSize; ++c) out << ',' << fmt(r.mean[c]) << ',' << fmt(r.std[c]);
    out << '\n';
  }
}

inline void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
}

/// report.json, actions_stats.csv and (optionally) trajectories/<trial>.csv.
inline void write_eval_outputs(const fs::path& dir, const EvalResult& r, bool trajectories, bool action_stats) {
  fs::create_directories(dir);
  write_text(dir / "report.json", to_json(r.report).dump(2) + "\n");
  if (action_stats) {
    std::ofstream out(dir / "actions_stats.csv");
    write_action_stats_csv(out, r.action_stats);
  }
  if (trajectories) {
    fs::create_directories(dir / "trajectories");
    for (std::size_t i = 0; i < r.trajectories.size(); ++i) {
      std::ofstream out(dir / "trajectories" / (std::to_string(i) + ".csv"));
      write_trajectory_csv(out, r.trajectories[i]);
    }
  }
}

// ---------------------------------------------------------------------------
// Training

struct EpisodeSummary {
  int episode = 0;
  double total_reward = 0.0;
  double moving_avg = 0.0;
  int steps = 0;
  int arrivals = 0;
  StepEvent end = StepEvent::none;
};

struct TrainResult {
  std::vector<double> rewards;
  std::vector<double> moving_avg;
  std::vector<EpisodeSummary> episodes;
  std::optional<AnyAgent> agent;
  long updates = 0;
};

using EpisodeCallback = std::function<void(const EpisodeSummary&)>;

inline std::string resolved_config_text(const Settings& s) {
  Settings copy = s;
  ConfigBinding b(copy);
  std::ostringstream os;
  b.write(os);
  return os.str();
}

/// Episode loop: reset, act with exploration, step, store, update.
/// Updates start once the buffer holds `warmup` transitions (and at least a
/// batch). When out_dir is set, rewards.csv is appended per episode and
/// checkpoints are written every `checkpoint_every` episodes and at the end.
template <class Agent>
TrainResult train_agent(Agent& agent, const Settings& s, const std::optional<fs::path>& out_dir,
                        const EpisodeCallback& on_episode = {}) {
  const TrainParams& tp = s.train;
  Environment env(tp.scenario, s.env);
  ReplayBuffer buffer(static_cast<std::size_t>(tp.buffer_capacity));
  Rng agent_rng = Rng::stream(tp.seed, "agent");
  Rng batch_rng = Rng::stream(tp.seed, "minibatch");

  std::ofstream rewards_csv;
  if (out_dir) {
    fs::create_directories(*out_dir / "checkpoints");
    write_text(*out_dir / "config.resolved", resolved_config_text(s));
    rewards_csv.open(*out_dir / "rewards.csv", std::ios::trunc);
    rewards_csv << "episode,total_reward,moving_avg_300\n";
  }

  TrainResult res;
  const std::size_t min_fill = static_cast<std::size_t>(std::max(tp.warmup, tp.batch_size));
  double window_sum = 0.0;
  for (int ep = 0; ep < tp.episodes; ++ep) {
    Observation obs = env.reset_training(splitmix64(tp.seed ^ splitmix64(static_cast<std::uint64_t>(ep) + 1)));
    agent.begin_episode();
    EpisodeSummary sum;
    sum.episode = ep + 1;
    for (;;) {
      const Action a = agent.act_explore(obs, agent_rng);
      const StepOutcome out = env.step(a);
      Transition t;
      t.s = obs;
      t.a = a;
      t.r = out.reward;
      t.s_next = out.observation;
      t.done = out.done && out.event != StepEvent::step_cap;
      buffer.push(t);
      if (buffer.size() >= min_fill) {
        if (auto batch = buffer.sample(static_cast<std::size_t>(tp.batch_size), batch_rng)) {
          agent.update(*batch, agent_rng);
          ++res.updates;
        }
      }
      sum.total_reward += out.reward;
      sum.arrivals += out.arrived ? 1 : 0;
      obs = out.observation;
      if (out.done) {
        sum.end = out.event;
        break;
      }
    }
    sum.steps = env.steps();
    res.rewards.push_back(sum.total_reward);
    window_sum += sum.total_reward;
    if (ep >= tp.moving_average_window) window_sum -= res.rewards[static_cast<std::size_t>(ep - tp.moving_average_window)];
    sum.moving_avg = window_sum / static_cast<double>(std::min(ep + 1, tp.moving_average_window));
    res.moving_avg.push_back(sum.moving_avg);
    res.episodes.push_back(sum);

    if (out_dir) {
      rewards_csv << sum.episode << ',' << fmt(sum.total_reward) << ',' << fmt(sum.moving_avg) << '\n';
      rewards_csv.flush();
      if (tp.checkpoint_every > 0 && sum.episode % tp.checkpoint_every == 0) {
        std::ostringstream name;
        name << "episode_" << std::setw(5) << std::setfill('0') << sum.episode << ".hnrl";
        save_checkpoint(*out_dir / "checkpoints" / name.str(), agent);
      }
    }
    if (on_episode) on_episode(sum);
  }
  if (out_dir) save_checkpoint(*out_dir / "checkpoints" / "final.hnrl", agent);
  res.agent.emplace(std::in_place_type<Agent>, agent);
  return res;
}

inline TrainResult train(const Settings& s, const std::optional<fs::path>& out_dir,
                         const EpisodeCallback& on_episode = {}) {
  s.train.validate();
  Rng init = Rng::stream(s.train.seed, "init");
  if (s.train.algo == Algo::ddpg) {
    DdpgAgent agent(s.resolved_ddpg(), init);
    return train_agent(agent, s, out_dir, on_episode);
  }
  SacAgent agent(s.resolved_sac(), init);
  return train_agent(agent, s, out_dir, on_episode);
}

/// Baseline smoke settings: width 128, 300 episodes, scenario 1.
inline void apply_quick(Settings& s) {
  s.train.width = 128;
  s.train.episodes = 300;
  s.train.scenario = 1;
}

}  // namespace hnav
