// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--paper-scale] [--out DIR] [--only N[,N...]]
//
// Criteria 3 and 4 train at full width for 1000 episodes on 3 seeds each and
// only run with --paper-scale; otherwise they are reported as SKIP.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "hnav/harness.hpp"
#include "oracles.hpp"

using namespace hnav;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  enum Kind { pass, fail, skip } kind;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sci(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

std::string fmt2(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.2f", v);
  return b;
}

Verdict baseline_table() {
  const auto t0 = Clock::now();
  std::ostringstream d;
  bool ok = true;
  for (int sc : {1, 2}) {
    for (Route r : {Route::air2water, Route::water2air}) {
      const EvalReport rep = run_baseline(EnvConfig{}, sc, r, 100, 1).report;
      int riser = rep.failure_causes.count("riser") ? rep.failure_causes.at("riser") : 0;
      if (sc == 1) ok &= rep.successes == 100;
      if (sc == 2) ok &= rep.successes == 0 && riser == 100;
      d << "s" << sc << " " << to_string(r) << " " << rep.successes << "/100";
      if (sc == 2) d << " (riser " << riser << ")";
      d << "; ";
    }
  }
  const double el = seconds_since(t0);
  ok &= el < 60.0;
  d << fmt2(el) << " s";
  return {ok ? Verdict::pass : Verdict::fail, d.str()};
}

Verdict reward_grid() {
  const auto t0 = Clock::now();
  const EpisodeConfig cfg;
  int mismatches = 0, cells = 0;
  for (int i = 0; i <= 50; ++i) {
    for (int j = 1; j <= 100; ++j) {
      const double d = i / 10.0, m = j / 10.0;
      // Eq. (1) with collision first; zero elsewhere.
      const double expect = m < 0.5 ? -10.0 : (d < 0.25 ? 100.0 : 0.0);
      mismatches += reward(d, m, cfg).first != expect;
      ++cells;
    }
  }
  const double el = seconds_since(t0);
  return {mismatches == 0 && el < 1.0 ? Verdict::pass : Verdict::fail,
          std::to_string(cells) + " cells, " + std::to_string(mismatches) + " mismatches, " + fmt2(el * 1e3) + " ms"};
}

Verdict paper_scale(Algo algo, int threshold, const fs::path& out) {
  std::ostringstream d;
  int passing = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto t0 = Clock::now();
    Settings s;
    s.train.algo = algo;
    s.train.seed = seed;
    s.train.episodes = TrainParams::default_episodes(1);
    const fs::path dir = out / (std::string(to_string(algo)) + "_paper_seed" + std::to_string(seed));
    const TrainResult tr = train(s, dir);
    EvalResult ev = evaluate(*tr.agent, s.env, 1, Route::air2water, 100, seed);
    ev.report.checkpoint = (dir / "checkpoints" / "final.hnrl").string();
    write_eval_outputs(dir / "eval_air2water", ev, false, true);
    passing += ev.report.successes >= threshold;
    d << "seed " << seed << ": " << ev.report.successes << "/100 (" << fmt2(seconds_since(t0) / 3600) << " h); ";
  }
  d << passing << "/3 seeds >= " << threshold;
  return {passing >= 2 ? Verdict::pass : Verdict::fail, d.str()};
}

Verdict quick_smoke(const fs::path& out) {
  const auto t0 = Clock::now();
  Settings s;
  apply_quick(s);
  const TrainResult tr = train(s, out / "quick");
  const double el = seconds_since(t0);
  double first = 0.0;
  for (int i = 0; i < 50; ++i) first += tr.rewards[static_cast<std::size_t>(i)];
  first /= 50.0;
  const double end_ma = tr.moving_avg.back();
  const bool ok = end_ma - first >= 20.0 && el <= 600.0;
  return {ok ? Verdict::pass : Verdict::fail, "first-50 mean " + fmt2(first) + ", final 300-ep moving avg " +
                                                  fmt2(end_ma) + " (need +20), " + fmt2(el) + " s"};
}

Verdict gradient_oracle() {
  double worst = 0.0;
  for (Head h : {Head::linear, Head::tanh}) {
    for (std::uint64_t s = 0; s < 50; ++s) worst = std::max(worst, oracle::mlp_gradient_error(h, 5000 + s + 100 * static_cast<int>(h)));
  }
  return {worst < 1e-5 ? Verdict::pass : Verdict::fail, "100 nets, worst relative error " + sci(worst)};
}

Verdict raycast_oracle() {
  Rng rng(31337);
  const double e1 = oracle::worst_raycast_error(1, 1000, rng);
  const double e2 = oracle::worst_raycast_error(2, 1000, rng);
  return {std::max(e1, e2) < 2e-3 ? Verdict::pass : Verdict::fail,
          "worst |analytic - marched|: scenario 1 " + sci(e1) + " m, scenario 2 " + sci(e2) + " m"};
}

Verdict ou_variance() {
  const double theta = 0.15, sigma = 0.2;
  OuProcess p(theta, sigma, 0.0, 0.01);
  Rng rng(8);
  const int n = 1000000;
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double x = p.step(rng);
    s += x;
    ss += x * x;
  }
  const double var = ss / n - (s / n) * (s / n);
  const double target = sigma * sigma / (2 * theta);
  const double rel = std::abs(var - target) / target;
  return {rel < 0.10 ? Verdict::pass : Verdict::fail,
          "theta 0.15 sigma 0.2 dt 0.01: var " + std::to_string(var) + " vs " + std::to_string(target) + " (" +
              fmt2(100 * rel) + "%)"};
}

Verdict physics_fixed_points() {
  const VehicleParams p;
  RigidBodyState h;
  h.position = Vec3(0, 0, 2.5);
  for (int i = 0; i < 3000; ++i) h = step_dynamics(h, p.weight(), Vec3::Zero(), p, Vec3::Zero(), Vec3::Zero(), 0.01);
  const double drift = (h.position - Vec3(0, 0, 2.5)).norm();

  RigidBodyState s;
  s.position = Vec3(0, 0, -10);
  for (int i = 0; i < 3000; ++i) s = step_dynamics(s, 0, Vec3::Zero(), p, Vec3::Zero(), Vec3::Zero(), 0.01);
  const double root =
      oracle::drag_balance_speed(p.water_drag_lin, p.water_drag_quad, (1 - p.buoyancy_ratio) * p.weight());
  const double rel = std::abs(-s.velocity.z() - root) / root;
  return {drift < 0.05 && rel < 0.05 ? Verdict::pass : Verdict::fail,
          "hover drift " + sci(drift) + " m / 30 s; sink speed " + std::to_string(-s.velocity.z()) +
              " vs root " + std::to_string(root) + " m/s"};
}

Verdict squashed_density() {
  double lo = 10, hi = -10;
  for (const auto& [m, ls] : std::vector<std::pair<double, double>>{{0, 0}, {0.5, -1}, {-1, 0.3}, {2, -2}, {0, -4}}) {
    const double mass = oracle::squashed_density_mass(m, ls);
    lo = std::min(lo, mass);
    hi = std::max(hi, mass);
  }
  return {lo >= 0.999 && hi <= 1.001 ? Verdict::pass : Verdict::fail,
          "mass in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]"};
}

Verdict determinism(const fs::path& out) {
  Settings s;
  s.train.episodes = 10;
  s.train.seed = 11;
  s.train.width = 64;
  train(s, out / "det_a");
  train(s, out / "det_b");
  const bool same_rewards = slurp(out / "det_a" / "rewards.csv") == slurp(out / "det_b" / "rewards.csv");
  const bool same_ckpt = slurp(out / "det_a" / "checkpoints" / "final.hnrl") ==
                         slurp(out / "det_b" / "checkpoints" / "final.hnrl");

  const AnyAgent loaded = load_checkpoint(out / "det_a" / "checkpoints" / "final.hnrl");
  save_checkpoint(out / "det_a" / "resaved.hnrl", loaded);
  const bool round_trip = slurp(out / "det_a" / "checkpoints" / "final.hnrl") == slurp(out / "det_a" / "resaved.hnrl");
  const AnyAgent again = load_checkpoint(out / "det_a" / "resaved.hnrl");
  Rng rng(3);
  bool same_actions = true;
  for (int i = 0; i < 100; ++i) {
    Observation o;
    for (int k = 0; k < kObservationSize; ++k) o[k] = rng.uniform(-1, 1);
    same_actions &= std::get<DdpgAgent>(loaded).act_greedy(o) == std::get<DdpgAgent>(again).act_greedy(o);
  }
  const bool ok = same_rewards && same_ckpt && round_trip && same_actions;
  return {ok ? Verdict::pass : Verdict::fail, std::string("rewards.csv identical: ") + (same_rewards ? "yes" : "no") +
                                                  ", checkpoint identical: " + (same_ckpt ? "yes" : "no") +
                                                  ", save/load/save bit-exact: " + (round_trip ? "yes" : "no") +
                                                  ", actions equal: " + (same_actions ? "yes" : "no")};
}

Verdict replay_properties() {
  const int cap = 50, extra = 37;
  ReplayBuffer b(cap);
  for (int i = 1; i <= cap + extra; ++i) {
    Transition t;
    t.r = i;
    b.push(t);
  }
  bool fifo = b.size() == static_cast<std::size_t>(cap);
  for (int i = 0; i < cap; ++i) fifo &= b.oldest(static_cast<std::size_t>(i)).r == extra + 1 + i;

  ReplayBuffer ten(10);
  for (int i = 0; i < 10; ++i) ten.push(Transition{});
  Rng rng(12);
  std::vector<int> counts(10, 0);
  for (int k = 0; k < 10000; ++k) {
    const auto idx = ten.sample_indices(10, rng);
    for (std::size_t i : *idx) ++counts[i];
  }
  double chi2 = 0;
  for (int c : counts) chi2 += (c - 1e4) * (c - 1e4) / 1e4;
  const double crit = 21.666;  // chi-square, 9 dof, alpha = 0.01
  return {fifo && chi2 < crit ? Verdict::pass : Verdict::fail,
          std::string("FIFO ") + (fifo ? "ok" : "broken") + ", chi2 " + fmt2(chi2) + " < " + fmt2(crit) +
              " over 1e5 draws"};
}

}  // namespace

int main(int argc, char** argv) {
  bool paper = false;
  fs::path out = fs::temp_directory_path() / "hnav_acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--paper-scale")) {
      paper = true;
    } else if (!std::strcmp(argv[i], "--out") && i + 1 < argc) {
      out = argv[++i];
    } else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
    } else {
      std::fprintf(stderr, "usage: %s [--paper-scale] [--out DIR] [--only N[,N...]]\n", argv[0]);
      return 2;
    }
  }
  fs::create_directories(out);

  const std::vector<std::pair<int, std::pair<const char*, std::function<Verdict()>>>> criteria{
      {1, {"baseline matches Table I", baseline_table}},
      {2, {"reward equals two-case function on grid", reward_grid}},
      {3, {"DDPG paper scale >= 80/100 air-to-water on 2 of 3 seeds",
           [&] { return paper ? paper_scale(Algo::ddpg, 80, out)
                              : Verdict{Verdict::skip, "needs --paper-scale (hours of CPU per seed)"}; }}},
      {4, {"SAC paper scale >= 55/100 air-to-water on 2 of 3 seeds",
           [&] { return paper ? paper_scale(Algo::sac, 55, out)
                              : Verdict{Verdict::skip, "needs --paper-scale (hours of CPU per seed)"}; }}},
      {5, {"quick training rises by >= 20 reward units", [&] { return quick_smoke(out); }}},
      {6, {"backprop matches finite differences", gradient_oracle}},
      {7, {"ray cast matches marching within 2e-3 m", raycast_oracle}},
      {8, {"OU stationary variance within 10%", ou_variance}},
      {9, {"hover invariance and terminal sinking speed", physics_fixed_points}},
      {10, {"squashed density integrates to 1", squashed_density}},
      {11, {"determinism and checkpoint round trip", [&] { return determinism(out); }}},
      {12, {"replay FIFO and uniform sampling", replay_properties}},
  };

  int failed = 0;
  for (const auto& [id, entry] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    const auto& [name, run] = entry;
    Verdict v{Verdict::fail, ""};
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {Verdict::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = v.kind == Verdict::pass ? "PASS" : v.kind == Verdict::fail ? "FAIL" : "SKIP";
    failed += v.kind == Verdict::fail;
    std::printf("[%s] %2d %s -- %s\n", tag, id, name, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
