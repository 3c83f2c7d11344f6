#include "flexedge/config_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace flexedge {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

using KeyValues = std::map<std::string, std::string>;

KeyValues tokenize(const std::string& text) {
  KeyValues kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key or value");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError("config: duplicate key '" + key + "'");
    }
  }
  return kv;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& key, const std::string& tok) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || errno == ERANGE) {
    throw ConfigError("config: key '" + key + "' has malformed number '" +
                      tok + "'");
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& tok) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size() || errno == ERANGE) {
    throw ConfigError("config: key '" + key + "' has malformed integer '" +
                      tok + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& tok) {
  if (tok == "true" || tok == "1") return true;
  if (tok == "false" || tok == "0") return false;
  throw ConfigError("config: key '" + key + "' has malformed boolean '" +
                    tok + "'");
}

class KeyConsumer {
 public:
  explicit KeyConsumer(KeyValues kv) : kv_(std::move(kv)) {}

  bool take(const std::string& key, std::string* value) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return false;
    *value = it->second;
    kv_.erase(it);
    return true;
  }

  void scalar(const std::string& key, double* out) {
    std::string v;
    if (take(key, &v)) *out = parse_double(key, one(key, v));
  }
  void integer(const std::string& key, int* out) {
    std::string v;
    if (take(key, &v)) *out = static_cast<int>(parse_int(key, one(key, v)));
  }
  void integer(const std::string& key, long* out) {
    std::string v;
    if (take(key, &v)) *out = static_cast<long>(parse_int(key, one(key, v)));
  }
  void uinteger(const std::string& key, std::uint64_t* out) {
    std::string v;
    if (take(key, &v)) {
      const std::string tok = one(key, v);
      errno = 0;
      char* end = nullptr;
      const unsigned long long u = std::strtoull(tok.c_str(), &end, 10);
      if (end != tok.c_str() + tok.size() || errno == ERANGE) {
        throw ConfigError("config: key '" + key + "' has malformed integer '" +
                          tok + "'");
      }
      *out = u;
    }
  }
  void boolean(const std::string& key, bool* out) {
    std::string v;
    if (take(key, &v)) *out = parse_bool(key, one(key, v));
  }
  void pair(const std::string& key, double* lo, double* hi) {
    std::string v;
    if (!take(key, &v)) return;
    const auto toks = split_ws(v);
    if (toks.size() != 2) {
      throw ConfigError("config: key '" + key + "' wants two values");
    }
    *lo = parse_double(key, toks[0]);
    *hi = parse_double(key, toks[1]);
  }
  void vec3(const std::string& key, Eigen::Vector3d* out) {
    std::string v;
    if (!take(key, &v)) return;
    const auto toks = split_ws(v);
    if (toks.size() != 3) {
      throw ConfigError("config: key '" + key + "' wants three values");
    }
    for (int i = 0; i < 3; ++i) (*out)(i) = parse_double(key, toks[i]);
  }
  void int_list(const std::string& key, std::vector<int>* out) {
    std::string v;
    if (!take(key, &v)) return;
    const auto toks = split_ws(v);
    if (toks.empty()) {
      throw ConfigError("config: key '" + key + "' wants at least one value");
    }
    out->clear();
    for (const auto& t : toks) {
      out->push_back(static_cast<int>(parse_int(key, t)));
    }
  }

  void finish() const {
    if (!kv_.empty()) {
      throw ConfigError("config: unknown key '" + kv_.begin()->first + "'");
    }
  }

 private:
  static std::string one(const std::string& key, const std::string& v) {
    const auto toks = split_ws(v);
    if (toks.size() != 1) {
      throw ConfigError("config: key '" + key + "' wants a single value");
    }
    return toks[0];
  }

  KeyValues kv_;
};

void apply_scenario(KeyConsumer& kc, ScenarioConfig* c) {
  kc.integer("num_vehicles", &c->num_vehicles);
  kc.integer("num_slots", &c->num_slots);
  kc.scalar("period", &c->period);
  kc.scalar("area_half_extent", &c->area_half_extent);
  kc.scalar("bandwidth", &c->bandwidth);
  kc.scalar("noise_psd", &c->noise_psd);
  kc.scalar("tx_power_vehicle", &c->tx_power_vehicle);
  kc.scalar("tx_power_uav", &c->tx_power_uav);
  kc.scalar("ref_channel_gain", &c->ref_channel_gain);
  kc.scalar("uav_altitude", &c->uav_altitude);
  kc.vec3("rsu_position", &c->rsu_position);
  kc.scalar("effective_cap_coeff", &c->effective_cap_coeff);
  kc.scalar("uav_cpu_max", &c->uav_cpu_max);
  kc.scalar("rsu_cpu_per_vehicle_max", &c->rsu_cpu_per_vehicle_max);
  kc.scalar("vehicle_cpu", &c->vehicle_cpu);
  kc.scalar("deviation_ratio", &c->deviation_ratio);
  kc.pair("task_bits_range", &c->task_bits_min, &c->task_bits_max);
  kc.pair("task_density_range", &c->task_density_min, &c->task_density_max);
  kc.scalar("deadline", &c->deadline);
  kc.scalar("vehicle_speed", &c->vehicle_speed);
  kc.scalar("uav_P0", &c->uav.rotor.blade_power);
  kc.scalar("uav_Pi", &c->uav.rotor.induced_power);
  kc.scalar("uav_U_tip", &c->uav.rotor.tip_speed);
  kc.scalar("uav_v0", &c->uav.rotor.mean_rotor_velocity);
  kc.scalar("uav_d0", &c->uav.rotor.fuselage_drag_ratio);
  kc.scalar("uav_s", &c->uav.rotor.rotor_solidity);
  kc.scalar("uav_rho", &c->uav.rotor.air_density);
  kc.scalar("uav_A", &c->uav.rotor.disc_area);
  kc.scalar("uav_v_max", &c->uav.v_max);
  kc.scalar("uav_a_max", &c->uav.a_max);
  kc.integer("profile_speed_exponent",
             &c->uav.rotor.profile_speed_exponent);
  kc.scalar("penalty_coeff", &c->penalty_coeff);
}

void apply_train(KeyConsumer& kc, rl::TrainConfig* c) {
  kc.scalar("discount", &c->discount);
  kc.scalar("gae_lambda", &c->gae_lambda);
  kc.scalar("clip_epsilon", &c->clip_epsilon);
  kc.integer("epochs_per_update", &c->epochs_per_update);
  kc.integer("minibatch_size", &c->minibatch_size);
  kc.integer("episodes_per_update", &c->episodes_per_update);
  kc.integer("total_episodes", &c->total_episodes);
  kc.scalar("entropy_coef", &c->entropy_coef);
  kc.scalar("actor_lr", &c->actor_lr);
  kc.scalar("critic_lr", &c->critic_lr);
  kc.scalar("grad_clip_norm", &c->grad_clip_norm);
  kc.boolean("normalize_advantages", &c->normalize_advantages);
  kc.scalar("reward_scale", &c->reward_scale);
  kc.scalar("init_log_std", &c->init_log_std);
  kc.int_list("hidden_sizes", &c->hidden_sizes);
  kc.integer("checkpoint_every", &c->checkpoint_every);
  kc.uinteger("seed", &c->seed);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig rc;
  KeyConsumer kc(tokenize(text));
  apply_scenario(kc, &rc.scenario);
  apply_train(kc, &rc.train);
  kc.finish();
  validate(rc.scenario);
  rl::validate(rc.train);
  return rc;
}

ScenarioConfig parse_scenario_config(const std::string& text) {
  ScenarioConfig c;
  KeyConsumer kc(tokenize(text));
  apply_scenario(kc, &c);
  kc.finish();
  validate(c);
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_run_config(ss.str());
}

std::string serialize(const ScenarioConfig& c) {
  std::ostringstream os;
  os << "# scenario\n";
  os << "num_vehicles = " << c.num_vehicles << '\n';
  os << "num_slots = " << c.num_slots << '\n';
  os << "period = " << fmt(c.period) << '\n';
  os << "area_half_extent = " << fmt(c.area_half_extent) << '\n';
  os << "bandwidth = " << fmt(c.bandwidth) << '\n';
  os << "noise_psd = " << fmt(c.noise_psd) << '\n';
  os << "tx_power_vehicle = " << fmt(c.tx_power_vehicle) << '\n';
  os << "tx_power_uav = " << fmt(c.tx_power_uav) << '\n';
  os << "ref_channel_gain = " << fmt(c.ref_channel_gain) << '\n';
  os << "uav_altitude = " << fmt(c.uav_altitude) << '\n';
  os << "rsu_position = " << fmt(c.rsu_position(0)) << ' '
     << fmt(c.rsu_position(1)) << ' ' << fmt(c.rsu_position(2)) << '\n';
  os << "effective_cap_coeff = " << fmt(c.effective_cap_coeff) << '\n';
  os << "uav_cpu_max = " << fmt(c.uav_cpu_max) << '\n';
  os << "rsu_cpu_per_vehicle_max = " << fmt(c.rsu_cpu_per_vehicle_max) << '\n';
  os << "vehicle_cpu = " << fmt(c.vehicle_cpu) << '\n';
  os << "deviation_ratio = " << fmt(c.deviation_ratio) << '\n';
  os << "task_bits_range = " << fmt(c.task_bits_min) << ' '
     << fmt(c.task_bits_max) << '\n';
  os << "task_density_range = " << fmt(c.task_density_min) << ' '
     << fmt(c.task_density_max) << '\n';
  os << "deadline = " << fmt(c.deadline) << '\n';
  os << "vehicle_speed = " << fmt(c.vehicle_speed) << '\n';
  os << "uav_P0 = " << fmt(c.uav.rotor.blade_power) << '\n';
  os << "uav_Pi = " << fmt(c.uav.rotor.induced_power) << '\n';
  os << "uav_U_tip = " << fmt(c.uav.rotor.tip_speed) << '\n';
  os << "uav_v0 = " << fmt(c.uav.rotor.mean_rotor_velocity) << '\n';
  os << "uav_d0 = " << fmt(c.uav.rotor.fuselage_drag_ratio) << '\n';
  os << "uav_s = " << fmt(c.uav.rotor.rotor_solidity) << '\n';
  os << "uav_rho = " << fmt(c.uav.rotor.air_density) << '\n';
  os << "uav_A = " << fmt(c.uav.rotor.disc_area) << '\n';
  os << "uav_v_max = " << fmt(c.uav.v_max) << '\n';
  os << "uav_a_max = " << fmt(c.uav.a_max) << '\n';
  os << "profile_speed_exponent = " << c.uav.rotor.profile_speed_exponent
     << '\n';
  os << "penalty_coeff = " << fmt(c.penalty_coeff) << '\n';
  return os.str();
}

std::string serialize(const RunConfig& rc) {
  std::ostringstream os;
  os << serialize(rc.scenario);
  const rl::TrainConfig& c = rc.train;
  os << "# training\n";
  os << "discount = " << fmt(c.discount) << '\n';
  os << "gae_lambda = " << fmt(c.gae_lambda) << '\n';
  os << "clip_epsilon = " << fmt(c.clip_epsilon) << '\n';
  os << "epochs_per_update = " << c.epochs_per_update << '\n';
  os << "minibatch_size = " << c.minibatch_size << '\n';
  os << "episodes_per_update = " << c.episodes_per_update << '\n';
  os << "total_episodes = " << c.total_episodes << '\n';
  os << "entropy_coef = " << fmt(c.entropy_coef) << '\n';
  os << "actor_lr = " << fmt(c.actor_lr) << '\n';
  os << "critic_lr = " << fmt(c.critic_lr) << '\n';
  os << "grad_clip_norm = " << fmt(c.grad_clip_norm) << '\n';
  os << "normalize_advantages = "
     << (c.normalize_advantages ? "true" : "false") << '\n';
  os << "reward_scale = " << fmt(c.reward_scale) << '\n';
  os << "init_log_std = " << fmt(c.init_log_std) << '\n';
  os << "hidden_sizes =";
  for (int h : c.hidden_sizes) os << ' ' << h;
  os << '\n';
  os << "checkpoint_every = " << c.checkpoint_every << '\n';
  os << "seed = " << c.seed << '\n';
  return os.str();
}

std::uint64_t scenario_digest(const ScenarioConfig& config) {
  const std::string text = serialize(config);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace flexedge
