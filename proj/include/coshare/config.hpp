#pragma once

// Scenario configuration, the two built-in scenarios, and JSON loading.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coshare/geometry.hpp"
#include "coshare/ran.hpp"
#include "coshare/strategy.hpp"

namespace coshare {

enum class Mode { NoSharing, OneShotOnly, Combined, FullCooperation };

constexpr std::array<Mode, 4> kAllModes{Mode::NoSharing, Mode::OneShotOnly, Mode::Combined,
                                        Mode::FullCooperation};

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::NoSharing: return "no-sharing";
    case Mode::OneShotOnly: return "one-shot-only";
    case Mode::Combined: return "combined";
    case Mode::FullCooperation: return "full-cooperation";
  }
  return "?";
}

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::invalid_argument("config: " + field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

inline Mode parse_mode(const std::string& s) {
  for (auto m : kAllModes)
    if (s == to_string(m)) return m;
  throw ConfigError("mode", "unknown mode '" + s + "'");
}

enum class LoadSchedule { Constant, Block, Interleaved };

inline const char* to_string(LoadSchedule s) {
  switch (s) {
    case LoadSchedule::Constant: return "constant";
    case LoadSchedule::Block: return "block";
    case LoadSchedule::Interleaved: return "interleaved";
  }
  return "?";
}

/// Poisson means per operator. With Block or Interleaved the alternate
/// means apply in half of the stages: the second half of the horizon for
/// Block, a fair coin per stage for Interleaved.
struct LoadConfig {
  double mean_a{5.0};
  double mean_b{5.0};
  LoadSchedule schedule{LoadSchedule::Constant};
  double alt_mean_a{5.0};
  double alt_mean_b{5.0};
};

/// Where an operator's UEs are dropped: listed rooms, or the whole building
/// when `rooms` is empty.
struct ServiceArea {
  std::vector<std::size_t> rooms;
};

struct ScenarioConfig {
  std::string scenario{"custom"};
  std::uint32_t n_stages{4000};
  std::uint64_t seed{1};
  Layout layout{four_room_layout()};
  PropagationParams propagation;
  CarrierPlan carriers{default_carrier_plan()};
  double tx_power_dbm{20.0};
  double noise_dbm{-80.0};
  std::vector<BaseStation> base_stations;
  std::array<ServiceArea, 2> service_area;
  LoadConfig loads;
  StrategyParams strategy;
  std::uint32_t ledger_window{0};

  Region region_of(OperatorId op) const {
    const auto& sa = service_area[index_of(op)];
    return sa.rooms.empty() ? whole_building(layout) : rooms_region(layout, sa.rooms);
  }

  void validate() const {
    if (n_stages < 1) throw ConfigError("n_stages", "must be >= 1");
    try {
      layout.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("layout", e.what());
    }
    try {
      propagation.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("propagation", e.what());
    }
    try {
      carriers.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("carriers", e.what());
    }
    for (auto op : kOperators) {
      bool has = false;
      for (const auto& b : base_stations) has = has || b.owner == op;
      if (!has)
        throw ConfigError("base_stations", std::string("operator ") + to_string(op) + " has none");
    }
    for (const auto& b : base_stations)
      if (!layout.contains(b.position))
        throw ConfigError("base_stations", "base station outside the building");
    for (auto op : kOperators) {
      for (auto r : service_area[index_of(op)].rooms)
        if (r >= layout.rooms.size())
          throw ConfigError(std::string("service_area.") + to_string(op), "room index out of range");
      if (!(region_of(op).area() > 0.0))
        throw ConfigError(std::string("service_area.") + to_string(op), "empty region");
    }
    for (double m : {loads.mean_a, loads.mean_b, loads.alt_mean_a, loads.alt_mean_b})
      if (!(m >= 0.0)) throw ConfigError("loads", "Poisson means must be >= 0");
    if (strategy.credit_limit < 0) throw ConfigError("strategy.credit_limit", "must be >= 0");
    if (strategy.q_gain < 0.0 || strategy.q_gain > 1.0)
      throw ConfigError("strategy.q_gain", "must be in [0, 1]");
    if (strategy.q_loss < 0.0 || strategy.q_loss > 1.0)
      throw ConfigError("strategy.q_loss", "must be in [0, 1]");
    if (strategy.favor_duration < 1) throw ConfigError("strategy.favor_duration", "must be >= 1");
    if (strategy.fixed_theta_l < 0.0) throw ConfigError("strategy.fixed_theta_l", "must be >= 0");
    if (strategy.forced_proposal &&
        *strategy.forced_proposal > carriers.contributed_by(OperatorId::A).size())
      throw ConfigError("strategy.forced_proposal", "exceeds contributed carriers");
  }
};

/// One BS at the centroid of each room; A holds rooms 0 and 3, B rooms 1 and 2.
inline std::vector<BaseStation> diagonal_base_stations(const Layout& l, double tx_power_dbm) {
  return {{OperatorId::A, l.rooms[0].centroid(), tx_power_dbm},
          {OperatorId::A, l.rooms[3].centroid(), tx_power_dbm},
          {OperatorId::B, l.rooms[1].centroid(), tx_power_dbm},
          {OperatorId::B, l.rooms[2].centroid(), tx_power_dbm}};
}

/// Equal mean load 5, 10 dB internal walls, UEs in their operator's rooms.
inline ScenarioConfig equal_load_low_interference() {
  ScenarioConfig c;
  c.scenario = "equal-load-low-interf";
  c.layout = four_room_layout(50.0, 10.0, true);
  c.base_stations = diagonal_base_stations(c.layout, c.tx_power_dbm);
  c.service_area = {ServiceArea{{0, 3}}, ServiceArea{{1, 2}}};
  c.loads = {5.0, 5.0, LoadSchedule::Constant, 5.0, 5.0};
  return c;
}

/// No internal walls, UEs anywhere in the building, means 8/2 in half of
/// the stages and 2/8 in the other half.
inline ScenarioConfig asymmetric_load_high_interference() {
  ScenarioConfig c;
  c.scenario = "asym-load-high-interf";
  c.layout = four_room_layout(50.0, 10.0, false);
  c.base_stations = diagonal_base_stations(c.layout, c.tx_power_dbm);
  c.service_area = {ServiceArea{}, ServiceArea{}};
  c.loads = {8.0, 2.0, LoadSchedule::Interleaved, 2.0, 8.0};
  return c;
}

inline ScenarioConfig preset(const std::string& name) {
  if (name == "equal-load-low-interf") return equal_load_low_interference();
  if (name == "asym-load-high-interf") return asymmetric_load_high_interference();
  if (name == "custom") return equal_load_low_interference();
  throw ConfigError("scenario", "unknown scenario '" + name + "'");
}

// JSON ----------------------------------------------------------------------

namespace detail {

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + key, e.what());
  }
}

inline OperatorId parse_operator(const nlohmann::json& j, const std::string& field) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "A") return OperatorId::A;
    if (s == "B") return OperatorId::B;
  }
  throw ConfigError(field, "operator must be \"A\" or \"B\"");
}

inline Position parse_point(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(field, "expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline void parse_coeffs(const nlohmann::json& j, const char* key, PathLossCoeffs& c) {
  if (!j.contains(key)) return;
  const auto& o = j.at(key);
  const std::string p = std::string("propagation.") + key + ".";
  read_if(o, "slope", c.slope, p);
  read_if(o, "intercept", c.intercept, p);
  read_if(o, "freq_coeff", c.freq_coeff, p);
}

}  // namespace detail

/// Builds a config from JSON. A "scenario" key selects the preset that
/// other keys override; unknown keys are rejected.
inline ScenarioConfig config_from_json(const nlohmann::json& j) {
  using detail::read_if;
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  static const std::vector<std::string> known{
      "scenario",   "n_stages",      "seed",     "layout",       "propagation",   "carriers",
      "tx_power_dbm", "noise_dbm",   "base_stations", "service_area", "loads", "strategy",
      "ledger_window"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw ConfigError(k, "unknown key");

  std::string name = "custom";
  read_if(j, "scenario", name, "");
  ScenarioConfig c = preset(name);
  c.scenario = name;
  read_if(j, "n_stages", c.n_stages, "");
  read_if(j, "seed", c.seed, "");
  read_if(j, "tx_power_dbm", c.tx_power_dbm, "");
  read_if(j, "noise_dbm", c.noise_dbm, "");
  read_if(j, "ledger_window", c.ledger_window, "");

  if (j.contains("layout")) {
    const auto& l = j.at("layout");
    double wall_loss = 10.0;
    bool walls = !c.layout.internal_walls.empty();
    double side = c.layout.width_m;
    read_if(l, "side_m", side, "layout.");
    read_if(l, "wall_loss_db", wall_loss, "layout.");
    read_if(l, "internal_walls", walls, "layout.");
    c.layout = four_room_layout(side, wall_loss, walls);
    if (l.contains("walls")) {
      c.layout.internal_walls.clear();
      std::size_t i = 0;
      for (const auto& w : l.at("walls")) {
        const auto f = "layout.walls[" + std::to_string(i++) + "]";
        WallSegment seg;
        seg.from = detail::parse_point(w.value("from", nlohmann::json()), f + ".from");
        seg.to = detail::parse_point(w.value("to", nlohmann::json()), f + ".to");
        read_if(w, "loss_db", seg.loss_db, f + ".");
        c.layout.internal_walls.push_back(seg);
      }
    }
  }
  if (j.contains("propagation")) {
    const auto& p = j.at("propagation");
    read_if(p, "carrier_freq_ghz", c.propagation.carrier_freq_ghz, "propagation.");
    detail::parse_coeffs(p, "los", c.propagation.los);
    detail::parse_coeffs(p, "nlos", c.propagation.nlos);
    read_if(p, "shadowing", c.propagation.shadowing, "propagation.");
    read_if(p, "shadowing_sigma_los_db", c.propagation.shadowing_sigma_los_db, "propagation.");
    read_if(p, "shadowing_sigma_nlos_db", c.propagation.shadowing_sigma_nlos_db, "propagation.");
    read_if(p, "min_distance_m", c.propagation.min_distance_m, "propagation.");
  }
  if (j.contains("carriers")) {
    const auto& p = j.at("carriers");
    read_if(p, "n_cc", c.carriers.n_cc, "carriers.");
    read_if(p, "cc_bandwidth_hz", c.carriers.cc_bandwidth_hz, "carriers.");
    if (p.contains("owner_of")) {
      c.carriers.owner_of.clear();
      for (const auto& o : p.at("owner_of"))
        c.carriers.owner_of.push_back(detail::parse_operator(o, "carriers.owner_of"));
    }
    if (p.contains("contributed")) {
      std::vector<bool> v;
      read_if(p, "contributed", v, "carriers.");
      c.carriers.contributed = v;
    }
  }
  bool bs_given = false;
  if (j.contains("base_stations")) {
    bs_given = true;
    c.base_stations.clear();
    std::size_t i = 0;
    for (const auto& b : j.at("base_stations")) {
      const auto f = "base_stations[" + std::to_string(i++) + "]";
      BaseStation bs;
      bs.owner = detail::parse_operator(b.value("owner", nlohmann::json()), f + ".owner");
      read_if(b, "x", bs.position.x, f + ".");
      read_if(b, "y", bs.position.y, f + ".");
      bs.tx_power_per_cc_dbm = c.tx_power_dbm;
      read_if(b, "tx_power_dbm", bs.tx_power_per_cc_dbm, f + ".");
      c.base_stations.push_back(bs);
    }
  }
  if (!bs_given) c.base_stations = diagonal_base_stations(c.layout, c.tx_power_dbm);
  if (j.contains("service_area")) {
    const auto& s = j.at("service_area");
    for (auto op : kOperators) {
      const std::string key = to_string(op);
      if (!s.contains(key)) continue;
      const auto& v = s.at(key);
      ServiceArea sa;
      if (v.is_string() && v.get<std::string>() == "building") {
      } else if (v.is_object() && v.contains("rooms")) {
        read_if(v, "rooms", sa.rooms, "service_area." + key + ".");
      } else {
        throw ConfigError("service_area." + key, "expected \"building\" or {\"rooms\": [...]}");
      }
      c.service_area[index_of(op)] = sa;
    }
  }
  if (j.contains("loads")) {
    const auto& l = j.at("loads");
    read_if(l, "mean_a", c.loads.mean_a, "loads.");
    read_if(l, "mean_b", c.loads.mean_b, "loads.");
    read_if(l, "alt_mean_a", c.loads.alt_mean_a, "loads.");
    read_if(l, "alt_mean_b", c.loads.alt_mean_b, "loads.");
    if (l.contains("schedule")) {
      std::string s;
      read_if(l, "schedule", s, "loads.");
      if (s == "constant") c.loads.schedule = LoadSchedule::Constant;
      else if (s == "block") c.loads.schedule = LoadSchedule::Block;
      else if (s == "interleaved") c.loads.schedule = LoadSchedule::Interleaved;
      else throw ConfigError("loads.schedule", "expected constant, block or interleaved");
    }
  }
  if (j.contains("strategy")) {
    const auto& s = j.at("strategy");
    auto& p = c.strategy;
    read_if(s, "q_gain", p.q_gain, "strategy.");
    read_if(s, "q_loss", p.q_loss, "strategy.");
    read_if(s, "credit_limit", p.credit_limit, "strategy.");
    read_if(s, "warmup_stages", p.warmup_stages, "strategy.");
    read_if(s, "balance_gain", p.balance_gain, "strategy.");
    read_if(s, "reciprocity_cap", p.reciprocity_cap, "strategy.");
    read_if(s, "adaptive", p.adaptive, "strategy.");
    if (s.contains("fixed_theta_g")) {
      const auto& v = s.at("fixed_theta_g");
      if (v.is_string() && v.get<std::string>() == "inf")
        p.fixed_theta_g = std::numeric_limits<double>::infinity();
      else
        read_if(s, "fixed_theta_g", p.fixed_theta_g, "strategy.");
    }
    read_if(s, "fixed_theta_l", p.fixed_theta_l, "strategy.");
    read_if(s, "single_cc_favors", p.single_cc_favors, "strategy.");
    read_if(s, "favor_duration", p.favor_duration, "strategy.");
    read_if(s, "deny_all", p.deny_all, "strategy.");
    if (s.contains("forced_proposal")) {
      std::size_t v = 0;
      read_if(s, "forced_proposal", v, "strategy.");
      p.forced_proposal = v;
    }
    if (s.contains("favor_bases")) {
      std::string v;
      read_if(s, "favor_bases", v, "strategy.");
      if (v == "any") p.favor_bases = FavorBases::Any;
      else if (v == "shared-only") p.favor_bases = FavorBases::SharedOnly;
      else throw ConfigError("strategy.favor_bases", "expected any or shared-only");
    }
  }
  c.validate();
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<file>", e.what());
  }
  return config_from_json(j);
}

}  // namespace coshare
