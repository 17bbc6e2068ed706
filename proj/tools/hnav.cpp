#include <chrono>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "hnav/harness.hpp"

using namespace hnav;

namespace {

void print_report(const EvalReport& r) {
  std::printf("%s scenario %d %s: %d/%d successes, %d collisions, %d timeouts\n", r.policy.c_str(), r.scenario,
              r.route.c_str(), r.successes, r.trials, r.collisions, r.timeouts);
  std::printf("  t_air %.3f +- %.3f s, t_under %.3f +- %.3f s\n", r.t_air_mean, r.t_air_std, r.t_under_mean,
              r.t_under_std);
  for (const auto& [cause, n] : r.failure_causes) std::printf("  failure %s: %d\n", cause.c_str(), n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid aerial-underwater mapless navigation: train, evaluate, baseline"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "train a DDPG or SAC agent");
  int t_scenario = 1;
  std::string t_algo = "ddpg";
  int t_episodes = 0;
  std::uint64_t t_seed = 1;
  int t_width = 0;
  std::string t_out;
  std::string t_config;
  bool t_quick = false;
  train_cmd->add_option("--scenario", t_scenario)->check(CLI::IsMember({1, 2}));
  train_cmd->add_option("--algo", t_algo)->check(CLI::IsMember({"ddpg", "sac"}));
  train_cmd->add_option("--episodes", t_episodes);
  train_cmd->add_option("--seed", t_seed);
  train_cmd->add_option("--width", t_width);
  train_cmd->add_option("--out", t_out)->required();
  train_cmd->add_option("--config", t_config, "flat key = value file; flags override it");
  train_cmd->add_flag("--quick", t_quick, "width 128, 300 episodes, scenario 1");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string e_ckpt, e_route = "air2water", e_out, e_config;
  int e_scenario = 1, e_trials = 100;
  std::uint64_t e_seed = 1;
  bool e_traj = false;
  eval_cmd->add_option("--checkpoint", e_ckpt)->required();
  eval_cmd->add_option("--scenario", e_scenario)->check(CLI::IsMember({1, 2}));
  eval_cmd->add_option("--route", e_route)->check(CLI::IsMember({"air2water", "water2air"}));
  eval_cmd->add_option("--trials", e_trials)->check(CLI::NonNegativeNumber);
  eval_cmd->add_option("--seed", e_seed);
  eval_cmd->add_option("--out", e_out)->required();
  eval_cmd->add_option("--config", e_config);
  eval_cmd->add_flag("--log-trajectories", e_traj);

  // baseline
  auto* base_cmd = app.add_subcommand("baseline", "run the geometric-controller baseline");
  std::string b_route = "air2water", b_out, b_config;
  int b_scenario = 1, b_trials = 100;
  std::uint64_t b_seed = 1;
  base_cmd->add_option("--scenario", b_scenario)->check(CLI::IsMember({1, 2}));
  base_cmd->add_option("--route", b_route)->check(CLI::IsMember({"air2water", "water2air"}));
  base_cmd->add_option("--trials", b_trials)->check(CLI::NonNegativeNumber);
  base_cmd->add_option("--seed", b_seed);
  base_cmd->add_option("--out", b_out)->required();
  base_cmd->add_option("--config", b_config);

  CLI11_PARSE(app, argc, argv);

  try {
    Settings s;
    ConfigBinding binding(s);
    if (*train_cmd) {
      if (!t_config.empty()) binding.load(t_config);
      if (train_cmd->count("--scenario")) s.train.scenario = t_scenario;
      if (train_cmd->count("--algo")) s.train.algo = parse_algo(t_algo);
      if (train_cmd->count("--seed")) s.train.seed = t_seed;
      if (!train_cmd->count("--episodes") && t_config.empty()) {
        s.train.episodes = TrainParams::default_episodes(s.train.scenario);
      }
      if (t_quick) apply_quick(s);
      if (train_cmd->count("--episodes")) s.train.episodes = t_episodes;
      if (train_cmd->count("--width")) s.train.width = t_width;
      s.train.validate();

      const auto t0 = std::chrono::steady_clock::now();
      const TrainResult r = train(s, fs::path(t_out), [&](const EpisodeSummary& e) {
        if (e.episode % 10 == 0 || e.episode == s.train.episodes) {
          const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          std::printf("episode %d reward %.2f moving_avg %.2f steps %d end %s (%.0f s)\n", e.episode,
                      e.total_reward, e.moving_avg, e.steps, to_string(e.end), el);
          std::fflush(stdout);
        }
      });
      std::printf("trained %d episodes, %ld updates -> %s\n", s.train.episodes, r.updates,
                  (fs::path(t_out) / "checkpoints" / "final.hnrl").c_str());
      return 0;
    }
    if (*eval_cmd) {
      if (!e_config.empty()) binding.load(e_config);
      const AnyAgent agent = load_checkpoint(e_ckpt);
      EvalResult r = evaluate(agent, s.env, e_scenario, parse_route(e_route), e_trials, e_seed);
      r.report.checkpoint = e_ckpt;
      write_eval_outputs(e_out, r, e_traj, true);
      write_text(fs::path(e_out) / "config.resolved", resolved_config_text(s));
      print_report(r.report);
      return 0;
    }
    if (*base_cmd) {
      if (!b_config.empty()) binding.load(b_config);
      const EvalResult r = run_baseline(s.env, b_scenario, parse_route(b_route), b_trials, b_seed);
      write_eval_outputs(b_out, r, true, false);
      write_text(fs::path(b_out) / "config.resolved", resolved_config_text(s));
      print_report(r.report);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
