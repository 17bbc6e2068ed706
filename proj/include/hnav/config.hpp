#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hnav/ddpg.hpp"
#include "hnav/environment.hpp"
#include "hnav/sac.hpp"

namespace hnav {

enum class Algo { ddpg, sac };

inline Algo parse_algo(const std::string& s) {
  if (s == "ddpg") return Algo::ddpg;
  if (s == "sac") return Algo::sac;
  throw std::invalid_argument("unknown algo '" + s + "' (expected ddpg|sac)");
}
inline const char* to_string(Algo a) { return a == Algo::ddpg ? "ddpg" : "sac"; }

struct TrainParams {
  int scenario = 1;
  Algo algo = Algo::ddpg;
  int episodes = 1000;
  std::uint64_t seed = 1;
  int width = 512;
  int hidden_layers = 3;
  int batch_size = 256;
  int buffer_capacity = 50000;
  int warmup = 1000;
  int checkpoint_every = 100;
  int moving_average_window = 300;
  double gamma = 0.99;
  double tau = 0.005;
  double lr = 1e-3;

  static int default_episodes(int scenario) { return scenario == 2 ? 2500 : 1000; }

  void validate() const {
    if (scenario != 1 && scenario != 2) throw std::invalid_argument("scenario must be 1 or 2");
    if (episodes <= 0) throw std::invalid_argument("episodes must be positive");
    if (width < 8) throw std::invalid_argument("width must be >= 8");
    if (batch_size <= 0 || buffer_capacity <= 0 || hidden_layers <= 0) {
      throw std::invalid_argument("batch_size, buffer_capacity and hidden_layers must be positive");
    }
  }
};

/// All tunables of a run. Every constant is reachable by a flat config key.
struct Settings {
  TrainParams train;
  EnvConfig env;
  DdpgConfig ddpg;
  SacConfig sac;

  /// Copies the shared agent fields (width, gamma, tau, lr) into both agent configs.
  DdpgConfig resolved_ddpg() const {
    DdpgConfig c = ddpg;
    c.width = train.width;
    c.hidden_layers = train.hidden_layers;
    c.gamma = train.gamma;
    c.tau = train.tau;
    c.actor_adam.lr = c.critic_adam.lr = train.lr;
    return c;
  }
  SacConfig resolved_sac() const {
    SacConfig c = sac;
    c.width = train.width;
    c.hidden_layers = train.hidden_layers;
    c.gamma = train.gamma;
    c.tau = train.tau;
    c.actor_adam.lr = c.critic_adam.lr = c.alpha_adam.lr = train.lr;
    return c;
  }
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  return d;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

inline std::string fmt_double(double d) {
  std::ostringstream os;
  os << std::setprecision(17) << d;
  return os.str();
}

}  // namespace detail

/// Flat key registry over a Settings instance.
class ConfigBinding {
 public:
  struct Entry {
    std::function<void(const std::string&)> set;
    std::function<std::string()> get;
  };

  explicit ConfigBinding(Settings& s) {
    auto& v = s.env.vehicle;
    auto& g = s.env.gains;
    auto& d = s.env.disturbances;
    auto& e = s.env.episode;
    auto& t = s.train;

    real("vehicle.mass", v.mass);
    real("vehicle.inertia_x", v.inertia.x());
    real("vehicle.inertia_y", v.inertia.y());
    real("vehicle.inertia_z", v.inertia.z());
    real("vehicle.height", v.height);
    real("vehicle.gravity", v.gravity);
    real("vehicle.water_density", v.water_density);
    real("vehicle.buoyancy_ratio", v.buoyancy_ratio);
    real("vehicle.air_drag_lin", v.air_drag_lin);
    real("vehicle.air_drag_quad", v.air_drag_quad);
    real("vehicle.water_drag_lin", v.water_drag_lin);
    real("vehicle.water_drag_quad", v.water_drag_quad);
    real("vehicle.air_rot_drag", v.air_rot_drag);
    real("vehicle.water_rot_drag", v.water_rot_drag);
    real("vehicle.added_mass_factor", v.added_mass_factor);
    real("vehicle.max_thrust", v.max_thrust);
    real("vehicle.max_torque", v.max_torque);

    real("controller.k_x", g.k_x);
    real("controller.k_v", g.k_v);
    real("controller.k_R", g.k_R);
    real("controller.k_omega", g.k_omega);
    real("controller.water_scale", g.water_scale);
    entries_["controller.max_tilt_deg"] = {
        [&g](const std::string& val) { g.max_tilt = deg2rad(detail::parse_double("controller.max_tilt_deg", val)); },
        [&g] { return detail::fmt_double(g.max_tilt * 180.0 / kPi); }};

    boolean("disturbance.enabled", d.enabled);
    real("disturbance.wind_theta", d.wind_theta);
    real("disturbance.wind_sigma", d.wind_sigma);
    real("disturbance.current_theta", d.current_theta);
    real("disturbance.current_sigma", d.current_sigma);

    integer("episode.max_steps", e.max_steps);
    real("episode.c_d", e.c_d);
    real("episode.c_o", e.c_o);
    real("episode.r_arrive", e.r_arrive);
    real("episode.r_collide", e.r_collide);
    real("episode.agent_period", e.agent_period);
    real("episode.physics_dt", e.physics_dt);
    real("episode.target_margin", e.target_margin);
    real("episode.contact_margin", e.contact_margin);

    integer("train.scenario", t.scenario);
    entries_["train.algo"] = {[&t](const std::string& val) { t.algo = parse_algo(val); },
                              [&t] { return std::string(to_string(t.algo)); }};
    integer("train.episodes", t.episodes);
    entries_["train.seed"] = {[&t](const std::string& val) { t.seed = detail::parse_int<std::uint64_t>("train.seed", val); },
                              [&t] { return std::to_string(t.seed); }};
    integer("train.checkpoint_every", t.checkpoint_every);
    integer("train.moving_average_window", t.moving_average_window);

    integer("agent.width", t.width);
    integer("agent.hidden_layers", t.hidden_layers);
    integer("agent.batch_size", t.batch_size);
    integer("agent.buffer_capacity", t.buffer_capacity);
    integer("agent.warmup", t.warmup);
    real("agent.gamma", t.gamma);
    real("agent.tau", t.tau);
    real("agent.lr", t.lr);

    real("ddpg.ou_theta", s.ddpg.ou_theta);
    real("ddpg.ou_sigma", s.ddpg.ou_sigma);
    real("ddpg.ou_dt", s.ddpg.ou_dt);

    real("sac.initial_alpha", s.sac.initial_alpha);
    boolean("sac.auto_alpha", s.sac.auto_alpha);
    real("sac.target_entropy", s.sac.target_entropy);
    real("sac.log_std_min", s.sac.log_std_min);
    real("sac.log_std_max", s.sac.log_std_max);
  }

  void set(const std::string& key, const std::string& value) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("config: unknown key '" + key + "'");
    it->second.set(value);
  }

  std::string get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("config: unknown key '" + key + "'");
    return it->second.get();
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : entries_) out.push_back(k);
    return out;
  }

  /// `key = value` per line; `#` starts a comment.
  void parse(std::istream& in, const std::string& source = "<config>") {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
      }
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      try {
        set(key, value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
      } catch (const ConfigError& e) {
        throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
  }

  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    parse(in, path);
  }

  void write(std::ostream& out) const {
    for (const auto& [k, e] : entries_) out << k << " = " << e.get() << "\n";
  }

 private:
  void real(const std::string& key, double& ref) {
    entries_[key] = {[&ref, key](const std::string& v) { ref = detail::parse_double(key, v); },
                     [&ref] { return detail::fmt_double(ref); }};
  }
  void integer(const std::string& key, int& ref) {
    entries_[key] = {[&ref, key](const std::string& v) { ref = detail::parse_int<int>(key, v); },
                     [&ref] { return std::to_string(ref); }};
  }
  void boolean(const std::string& key, bool& ref) {
    entries_[key] = {[&ref, key](const std::string& v) { ref = detail::parse_bool(key, v); },
                     [&ref] { return std::string(ref ? "true" : "false"); }};
  }

  std::map<std::string, Entry> entries_;
};

}  // namespace hnav
