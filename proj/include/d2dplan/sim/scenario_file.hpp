#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "d2dplan/geometry.hpp"
#include "d2dplan/losses.hpp"
#include "d2dplan/ogd.hpp"
#include "d2dplan/rate.hpp"
#include "d2dplan/scenario.hpp"
#include "d2dplan/solver.hpp"

// Scenario ingestion for the simulator. Files are flat "key = value" text:
// one pair per line, '#' starts a comment, blank lines are skipped. Keys
// carry explicit units (speed_units_per_slot, slot_duration_seconds) so a
// reader can tell at a glance what scale a number lives on. Every key must
// be known and applicable; a stray or inapplicable key aborts the parse with
// its line number rather than being silently ignored.
//
// A file describes either a single planned user tracking an exogenous peer
// (peer_kind block) or two cooperatively planned users (second_* block).

namespace d2dplan::sim {

class ScenarioParseError : public std::runtime_error {
 public:
  ScenarioParseError(std::string key, int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                    : what),
        key_(std::move(key)),
        line_(line) {}

  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

struct StaticPeer {
  Vec2 at;
};
struct LinearPeer {
  Vec2 start;
  Vec2 velocity;  // units per slot
};
struct WaypointsPeer {
  std::vector<Vec2> points;
  double speed = 1.0;  // units per slot along the polyline
};
struct RandomWalkPeer {
  Vec2 start;
  double max_step = 1.0;
  std::optional<std::uint64_t> seed;  // falls back to the file seed
};
using PeerGenerator = std::variant<StaticPeer, LinearPeer, WaypointsPeer, RandomWalkPeer>;

// Per-slot peer positions for slots 1..slots. Deterministic given the seed;
// every consecutive step stays within the generator's declared bound.
inline std::vector<Vec2> generate_peer(const PeerGenerator& gen, int slots,
                                       std::uint64_t seed) {
  if (slots < 1) throw std::invalid_argument("generate_peer: need at least one slot");
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(slots));
  if (const auto* s = std::get_if<StaticPeer>(&gen)) {
    out.assign(static_cast<std::size_t>(slots), s->at);
  } else if (const auto* l = std::get_if<LinearPeer>(&gen)) {
    for (int t = 0; t < slots; ++t) out.push_back(l->start + static_cast<double>(t) * l->velocity);
  } else if (const auto* w = std::get_if<WaypointsPeer>(&gen)) {
    if (w->points.empty()) throw std::invalid_argument("generate_peer: no waypoints");
    if (!(w->speed > 0.0)) throw std::invalid_argument("generate_peer: waypoint speed must be positive");
    Vec2 pos = w->points.front();
    std::size_t seg = 1;
    out.push_back(pos);
    for (int t = 1; t < slots; ++t) {
      double left = w->speed;
      while (left > 0.0 && seg < w->points.size()) {
        const Vec2 to = w->points[seg];
        const double d = norm2(to - pos);
        if (d <= left) {
          pos = to;
          left -= d;
          ++seg;
        } else {
          pos = pos + (left / d) * (to - pos);
          left = 0.0;
        }
      }
      out.push_back(pos);
    }
  } else {
    const auto& r = std::get<RandomWalkPeer>(gen);
    if (!(r.max_step > 0.0)) throw std::invalid_argument("generate_peer: max_step must be positive");
    std::mt19937_64 rng(r.seed ? *r.seed : seed);
    auto uniform = [&] { return (rng() >> 11) * 0x1.0p-53; };
    Vec2 pos = r.start;
    out.push_back(pos);
    for (int t = 1; t < slots; ++t) {
      const double ang = 2.0 * 3.14159265358979323846 * uniform();
      const double rad = r.max_step * std::sqrt(uniform());
      pos = pos + Vec2{rad * std::cos(ang), rad * std::sin(ang)};
      out.push_back(pos);
    }
  }
  return out;
}

// Destination reading changes at `slot` (1-based) and stays at `point` until
// the next event.
struct DestEvent {
  int slot = 1;
  Vec2 point;
};

struct SecondUser {
  Vec2 start;
  Vec2 dest;
  double speed = 1.0;
  int horizon_slots = 2;
  int excess_delay_slots = 0;
};

enum class GammaMode { Auto, Fixed };
enum class LambdaSpecKind { LinearDown, LinearUp, Constant, Custom };

struct ScenarioFile {
  NormKind norm = NormKind::Euclidean;
  Vec2 start;
  Vec2 dest;
  double speed = 1.0;  // units per slot
  int horizon_slots = 2;
  int excess_delay_slots = 0;
  std::optional<double> region_diameter;
  std::vector<DestEvent> dest_events;

  std::optional<PeerGenerator> peer;
  std::optional<SecondUser> second;

  LossKind loss = LossKind::Huber;
  double huber_mu = 1e-3;  // knee radius is always the per-slot speed
  GammaMode gamma_mode = GammaMode::Auto;
  double gamma_value = 0.0;
  LambdaSpecKind lambda = LambdaSpecKind::LinearDown;
  double lambda_constant = 0.5;
  std::vector<double> lambda_values;

  RateModel rate;
  double slot_duration_s = 1.0;
  std::uint64_t seed = 1;

  bool cooperative() const { return second.has_value(); }
  int total_slots() const { return horizon_slots + excess_delay_slots; }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct Entry {
  std::string value;
  int line = 0;
  mutable bool used = false;
};

struct KeyMap {
  std::map<std::string, Entry> entries;
  std::string origin;

  const Entry* find(const std::string& key) const {
    auto it = entries.find(key);
    if (it == entries.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  const Entry& require(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) throw ScenarioParseError(key, 0, "missing required key '" + key + "'");
    return *e;
  }

  bool has(const std::string& key) const { return entries.count(key) != 0; }
};

inline double parse_double(const std::string& key, const Entry& e) {
  const char* s = e.value.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *detail::trim(end ? end : "").c_str() != '\0' || !std::isfinite(v))
    throw ScenarioParseError(key, e.line, "key '" + key + "' needs a finite number, got '" + e.value + "'");
  return v;
}

inline int parse_int(const std::string& key, const Entry& e) {
  const char* s = e.value.c_str();
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (end == s || *detail::trim(end ? end : "").c_str() != '\0')
    throw ScenarioParseError(key, e.line, "key '" + key + "' needs an integer, got '" + e.value + "'");
  return static_cast<int>(v);
}

inline std::uint64_t parse_u64(const std::string& key, const Entry& e) {
  const char* s = e.value.c_str();
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (end == s || *detail::trim(end ? end : "").c_str() != '\0' || e.value.find('-') != std::string::npos)
    throw ScenarioParseError(key, e.line, "key '" + key + "' needs an unsigned integer, got '" + e.value + "'");
  return static_cast<std::uint64_t>(v);
}

// Split "a, b; c, d" into groups of comma-separated numbers.
inline std::vector<std::vector<double>> parse_groups(const std::string& key, const Entry& e,
                                                     std::size_t group_size) {
  std::vector<std::vector<double>> groups;
  std::stringstream ss(e.value);
  std::string group;
  while (std::getline(ss, group, ';')) {
    group = trim(group);
    if (group.empty())
      throw ScenarioParseError(key, e.line, "key '" + key + "' has an empty group");
    std::vector<double> nums;
    std::stringstream gs(group);
    std::string item;
    while (std::getline(gs, item, ',')) {
      Entry fake{trim(item), e.line};
      nums.push_back(parse_double(key, fake));
    }
    if (nums.size() != group_size)
      throw ScenarioParseError(key, e.line,
                               "key '" + key + "' needs groups of " + std::to_string(group_size) +
                                   " numbers separated by ';'");
    groups.push_back(std::move(nums));
  }
  if (groups.empty()) throw ScenarioParseError(key, e.line, "key '" + key + "' is empty");
  return groups;
}

inline void require_positive(const std::string& key, const Entry& e, double v) {
  if (!(v > 0.0)) throw ScenarioParseError(key, e.line, "key '" + key + "' must be positive");
}

}  // namespace detail

inline ScenarioFile parse_scenario_text(const std::string& text,
                                        const std::string& origin = "<memory>") {
  using detail::Entry;
  detail::KeyMap kv;
  kv.origin = origin;

  std::stringstream ss(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ScenarioParseError("", line_no, "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ScenarioParseError("", line_no, "empty key");
    if (value.empty()) throw ScenarioParseError(key, line_no, "key '" + key + "' has no value");
    if (kv.entries.count(key))
      throw ScenarioParseError(key, line_no, "duplicate key '" + key + "'");
    kv.entries[key] = Entry{value, line_no};
  }

  ScenarioFile f;

  if (const Entry* e = kv.find("norm")) {
    if (e->value == "euclidean")
      f.norm = NormKind::Euclidean;
    else if (e->value == "manhattan")
      f.norm = NormKind::Manhattan;
    else
      throw ScenarioParseError("norm", e->line, "norm must be 'euclidean' or 'manhattan'");
  }

  f.start.x = detail::parse_double("start_x", kv.require("start_x"));
  f.start.y = detail::parse_double("start_y", kv.require("start_y"));
  f.dest.x = detail::parse_double("dest_x", kv.require("dest_x"));
  f.dest.y = detail::parse_double("dest_y", kv.require("dest_y"));

  {
    const Entry& e = kv.require("speed_units_per_slot");
    f.speed = detail::parse_double("speed_units_per_slot", e);
    detail::require_positive("speed_units_per_slot", e, f.speed);
  }
  {
    const Entry& e = kv.require("horizon_slots");
    f.horizon_slots = detail::parse_int("horizon_slots", e);
    if (f.horizon_slots < 1)
      throw ScenarioParseError("horizon_slots", e.line, "horizon_slots must be >= 1");
  }
  if (const Entry* e = kv.find("excess_delay_slots")) {
    f.excess_delay_slots = detail::parse_int("excess_delay_slots", *e);
    if (f.excess_delay_slots < 0)
      throw ScenarioParseError("excess_delay_slots", e->line, "excess_delay_slots must be >= 0");
  }
  if (const Entry* e = kv.find("region_diameter_units")) {
    const double r = detail::parse_double("region_diameter_units", *e);
    if (!(r >= 0.0))
      throw ScenarioParseError("region_diameter_units", e->line,
                               "region_diameter_units must be nonnegative");
    f.region_diameter = r;
  }
  if (const Entry* e = kv.find("dest_events")) {
    const auto groups = detail::parse_groups("dest_events", *e, 3);
    int prev = 0;
    for (const auto& g : groups) {
      DestEvent ev;
      ev.slot = static_cast<int>(g[0]);
      if (static_cast<double>(ev.slot) != g[0] || ev.slot < 1)
        throw ScenarioParseError("dest_events", e->line,
                                 "dest_events slots must be positive integers");
      if (ev.slot <= prev)
        throw ScenarioParseError("dest_events", e->line,
                                 "dest_events slots must be strictly increasing");
      prev = ev.slot;
      ev.point = {g[1], g[2]};
      f.dest_events.push_back(ev);
    }
  }

  const bool has_peer = kv.has("peer_kind");
  const bool has_second = kv.has("second_start_x");
  if (has_peer && has_second)
    throw ScenarioParseError("peer_kind", kv.entries.at("peer_kind").line,
                             "scenario mixes an exogenous peer with a second user");
  if (!has_peer && !has_second)
    throw ScenarioParseError("peer_kind", 0,
                             "scenario needs either a peer block or a second_* user block");

  if (has_peer) {
    const Entry& kind = *kv.find("peer_kind");
    if (kind.value == "static") {
      StaticPeer p;
      p.at.x = detail::parse_double("peer_x", kv.require("peer_x"));
      p.at.y = detail::parse_double("peer_y", kv.require("peer_y"));
      f.peer = p;
    } else if (kind.value == "linear") {
      LinearPeer p;
      p.start.x = detail::parse_double("peer_start_x", kv.require("peer_start_x"));
      p.start.y = detail::parse_double("peer_start_y", kv.require("peer_start_y"));
      p.velocity.x = detail::parse_double("peer_velocity_x_units_per_slot",
                                          kv.require("peer_velocity_x_units_per_slot"));
      p.velocity.y = detail::parse_double("peer_velocity_y_units_per_slot",
                                          kv.require("peer_velocity_y_units_per_slot"));
      f.peer = p;
    } else if (kind.value == "waypoints") {
      WaypointsPeer p;
      const Entry& pts = kv.require("peer_waypoints");
      for (const auto& g : detail::parse_groups("peer_waypoints", pts, 2))
        p.points.push_back({g[0], g[1]});
      const Entry& sp = kv.require("peer_speed_units_per_slot");
      p.speed = detail::parse_double("peer_speed_units_per_slot", sp);
      detail::require_positive("peer_speed_units_per_slot", sp, p.speed);
      f.peer = p;
    } else if (kind.value == "random_walk") {
      RandomWalkPeer p;
      p.start.x = detail::parse_double("peer_start_x", kv.require("peer_start_x"));
      p.start.y = detail::parse_double("peer_start_y", kv.require("peer_start_y"));
      const Entry& ms = kv.require("peer_max_step_units");
      p.max_step = detail::parse_double("peer_max_step_units", ms);
      detail::require_positive("peer_max_step_units", ms, p.max_step);
      if (const Entry* e = kv.find("peer_seed")) p.seed = detail::parse_u64("peer_seed", *e);
      f.peer = p;
    } else {
      throw ScenarioParseError("peer_kind", kind.line,
                               "peer_kind must be static, linear, waypoints, or random_walk");
    }
  } else {
    SecondUser u;
    u.start.x = detail::parse_double("second_start_x", kv.require("second_start_x"));
    u.start.y = detail::parse_double("second_start_y", kv.require("second_start_y"));
    u.dest.x = detail::parse_double("second_dest_x", kv.require("second_dest_x"));
    u.dest.y = detail::parse_double("second_dest_y", kv.require("second_dest_y"));
    u.speed = f.speed;
    u.horizon_slots = f.horizon_slots;
    u.excess_delay_slots = f.excess_delay_slots;
    if (const Entry* e = kv.find("second_speed_units_per_slot")) {
      u.speed = detail::parse_double("second_speed_units_per_slot", *e);
      detail::require_positive("second_speed_units_per_slot", *e, u.speed);
    }
    if (const Entry* e = kv.find("second_horizon_slots")) {
      u.horizon_slots = detail::parse_int("second_horizon_slots", *e);
      if (u.horizon_slots < 1)
        throw ScenarioParseError("second_horizon_slots", e->line,
                                 "second_horizon_slots must be >= 1");
    }
    if (const Entry* e = kv.find("second_excess_delay_slots")) {
      u.excess_delay_slots = detail::parse_int("second_excess_delay_slots", *e);
      if (u.excess_delay_slots < 0)
        throw ScenarioParseError("second_excess_delay_slots", e->line,
                                 "second_excess_delay_slots must be >= 0");
    }
    f.second = u;
  }

  if (const Entry* e = kv.find("loss")) {
    if (e->value == "huber")
      f.loss = LossKind::Huber;
    else if (e->value == "squared")
      f.loss = LossKind::Squared;
    else
      throw ScenarioParseError("loss", e->line, "loss must be 'huber' or 'squared'");
  }
  if (f.loss == LossKind::Huber) {
    if (const Entry* e = kv.find("huber_mu")) {
      f.huber_mu = detail::parse_double("huber_mu", *e);
      if (!(f.huber_mu > 0.0 && f.huber_mu < 1.0))
        throw ScenarioParseError("huber_mu", e->line, "huber_mu must lie in (0,1)");
    }
  }
  if (const Entry* e = kv.find("gamma")) {
    if (e->value == "auto") {
      f.gamma_mode = GammaMode::Auto;
    } else {
      f.gamma_mode = GammaMode::Fixed;
      f.gamma_value = detail::parse_double("gamma", *e);
      detail::require_positive("gamma", *e, f.gamma_value);
    }
  }
  if (const Entry* e = kv.find("lambda")) {
    if (e->value == "linear_down")
      f.lambda = LambdaSpecKind::LinearDown;
    else if (e->value == "linear_up")
      f.lambda = LambdaSpecKind::LinearUp;
    else if (e->value == "constant")
      f.lambda = LambdaSpecKind::Constant;
    else if (e->value == "custom")
      f.lambda = LambdaSpecKind::Custom;
    else
      throw ScenarioParseError("lambda", e->line,
                               "lambda must be linear_down, linear_up, constant, or custom");
  }
  if (f.lambda == LambdaSpecKind::Constant) {
    const Entry& e = kv.require("lambda_constant_value");
    f.lambda_constant = detail::parse_double("lambda_constant_value", e);
    if (!(f.lambda_constant >= 0.0 && f.lambda_constant <= 1.0))
      throw ScenarioParseError("lambda_constant_value", e.line,
                               "lambda_constant_value must lie in [0,1]");
  }
  if (f.lambda == LambdaSpecKind::Custom) {
    const Entry& e = kv.require("lambda_values");
    for (const auto& g : detail::parse_groups("lambda_values", e, 1)) {
      if (!(g[0] >= 0.0 && g[0] <= 1.0))
        throw ScenarioParseError("lambda_values", e.line, "lambda_values must lie in [0,1]");
      f.lambda_values.push_back(g[0]);
    }
  }

  if (const Entry* e = kv.find("rate_bandwidth_hz")) {
    f.rate.bandwidth_hz = detail::parse_double("rate_bandwidth_hz", *e);
    detail::require_positive("rate_bandwidth_hz", *e, f.rate.bandwidth_hz);
  }
  if (const Entry* e = kv.find("rate_alpha")) {
    f.rate.alpha = detail::parse_double("rate_alpha", *e);
    detail::require_positive("rate_alpha", *e, f.rate.alpha);
  }
  if (const Entry* e = kv.find("rate_noise_power")) {
    f.rate.sigma2 = detail::parse_double("rate_noise_power", *e);
    detail::require_positive("rate_noise_power", *e, f.rate.sigma2);
  }
  if (const Entry* e = kv.find("rate_distance_scale_units")) {
    f.rate.distance_scale = detail::parse_double("rate_distance_scale_units", *e);
    detail::require_positive("rate_distance_scale_units", *e, f.rate.distance_scale);
  }
  if (const Entry* e = kv.find("slot_duration_seconds")) {
    f.slot_duration_s = detail::parse_double("slot_duration_seconds", *e);
    detail::require_positive("slot_duration_seconds", *e, f.slot_duration_s);
  }
  if (const Entry* e = kv.find("seed")) f.seed = detail::parse_u64("seed", *e);

  for (const auto& [key, entry] : kv.entries) {
    if (!entry.used)
      throw ScenarioParseError(key, entry.line,
                               "unknown or inapplicable key '" + key + "'");
  }

  for (const DestEvent& ev : f.dest_events) {
    if (ev.slot > f.total_slots())
      throw ScenarioParseError("dest_events", 0, "dest_events slot beyond the horizon");
  }
  if (f.lambda == LambdaSpecKind::Custom &&
      static_cast<int>(f.lambda_values.size()) != f.total_slots())
    throw ScenarioParseError("lambda_values", 0,
                             "lambda_values must list one value per slot (" +
                                 std::to_string(f.total_slots()) + ")");

  return f;
}

inline ScenarioFile parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParseError("", 0, "cannot read scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// Canonical text form; parse_scenario_text(render_scenario_file(f)) rebuilds
// an identical file, which is also how reports echo their configuration.
inline std::string render_scenario_file(const ScenarioFile& f) {
  using detail::fmt;
  std::string out;
  auto kv = [&out](const std::string& k, const std::string& v) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  };
  kv("norm", f.norm == NormKind::Euclidean ? "euclidean" : "manhattan");
  kv("start_x", fmt(f.start.x));
  kv("start_y", fmt(f.start.y));
  kv("dest_x", fmt(f.dest.x));
  kv("dest_y", fmt(f.dest.y));
  kv("speed_units_per_slot", fmt(f.speed));
  kv("horizon_slots", std::to_string(f.horizon_slots));
  kv("excess_delay_slots", std::to_string(f.excess_delay_slots));
  if (f.region_diameter) kv("region_diameter_units", fmt(*f.region_diameter));
  if (!f.dest_events.empty()) {
    std::string v;
    for (const DestEvent& ev : f.dest_events) {
      if (!v.empty()) v += "; ";
      v += std::to_string(ev.slot) + ", " + fmt(ev.point.x) + ", " + fmt(ev.point.y);
    }
    kv("dest_events", v);
  }
  if (f.peer) {
    if (const auto* s = std::get_if<StaticPeer>(&*f.peer)) {
      kv("peer_kind", "static");
      kv("peer_x", fmt(s->at.x));
      kv("peer_y", fmt(s->at.y));
    } else if (const auto* l = std::get_if<LinearPeer>(&*f.peer)) {
      kv("peer_kind", "linear");
      kv("peer_start_x", fmt(l->start.x));
      kv("peer_start_y", fmt(l->start.y));
      kv("peer_velocity_x_units_per_slot", fmt(l->velocity.x));
      kv("peer_velocity_y_units_per_slot", fmt(l->velocity.y));
    } else if (const auto* w = std::get_if<WaypointsPeer>(&*f.peer)) {
      kv("peer_kind", "waypoints");
      std::string v;
      for (const Vec2& p : w->points) {
        if (!v.empty()) v += "; ";
        v += fmt(p.x) + ", " + fmt(p.y);
      }
      kv("peer_waypoints", v);
      kv("peer_speed_units_per_slot", fmt(w->speed));
    } else {
      const auto& r = std::get<RandomWalkPeer>(*f.peer);
      kv("peer_kind", "random_walk");
      kv("peer_start_x", fmt(r.start.x));
      kv("peer_start_y", fmt(r.start.y));
      kv("peer_max_step_units", fmt(r.max_step));
      if (r.seed) kv("peer_seed", std::to_string(*r.seed));
    }
  }
  if (f.second) {
    kv("second_start_x", fmt(f.second->start.x));
    kv("second_start_y", fmt(f.second->start.y));
    kv("second_dest_x", fmt(f.second->dest.x));
    kv("second_dest_y", fmt(f.second->dest.y));
    kv("second_speed_units_per_slot", fmt(f.second->speed));
    kv("second_horizon_slots", std::to_string(f.second->horizon_slots));
    kv("second_excess_delay_slots", std::to_string(f.second->excess_delay_slots));
  }
  kv("loss", f.loss == LossKind::Huber ? "huber" : "squared");
  if (f.loss == LossKind::Huber) kv("huber_mu", fmt(f.huber_mu));
  kv("gamma", f.gamma_mode == GammaMode::Auto ? "auto" : fmt(f.gamma_value));
  switch (f.lambda) {
    case LambdaSpecKind::LinearDown: kv("lambda", "linear_down"); break;
    case LambdaSpecKind::LinearUp: kv("lambda", "linear_up"); break;
    case LambdaSpecKind::Constant:
      kv("lambda", "constant");
      kv("lambda_constant_value", fmt(f.lambda_constant));
      break;
    case LambdaSpecKind::Custom: {
      kv("lambda", "custom");
      std::string v;
      for (double l : f.lambda_values) {
        if (!v.empty()) v += "; ";
        v += fmt(l);
      }
      kv("lambda_values", v);
      break;
    }
  }
  kv("rate_bandwidth_hz", fmt(f.rate.bandwidth_hz));
  kv("rate_alpha", fmt(f.rate.alpha));
  kv("rate_noise_power", fmt(f.rate.sigma2));
  kv("rate_distance_scale_units", fmt(f.rate.distance_scale));
  kv("slot_duration_seconds", fmt(f.slot_duration_s));
  kv("seed", std::to_string(f.seed));
  return out;
}

// Destination reading stream over slots 1..slots: the base destination until
// the first event, then each event's point from its slot onward.
inline std::vector<Vec2> dest_stream(const ScenarioFile& f, int slots) {
  std::vector<Vec2> out(static_cast<std::size_t>(slots), f.dest);
  for (const DestEvent& ev : f.dest_events) {
    for (int t = ev.slot; t <= slots; ++t) out[static_cast<std::size_t>(t - 1)] = ev.point;
  }
  return out;
}

// Single-user view with the exogenous streams materialised.
inline Scenario to_scenario(const ScenarioFile& f) {
  if (f.cooperative())
    throw std::invalid_argument(
        "to_scenario: cooperative scenarios have no exogenous peer stream");
  Scenario sc;
  sc.start = f.start;
  sc.speed = f.speed;
  sc.horizon_T = f.horizon_slots;
  sc.excess_delay = f.excess_delay_slots;
  sc.norm = f.norm;
  sc.region_diameter_R = f.region_diameter;
  const int slots = f.total_slots();
  sc.dest_stream = dest_stream(f, slots);
  sc.peer_stream = generate_peer(*f.peer, slots, f.seed);
  sc.validate();
  return sc;
}

inline CooperativeProblem to_cooperative(const ScenarioFile& f) {
  if (!f.cooperative())
    throw std::invalid_argument("to_cooperative: scenario has no second user");
  CooperativeProblem p;
  p.a = {f.start, f.dest, f.total_slots(), f.speed};
  p.b = {f.second->start, f.second->dest,
         f.second->horizon_slots + f.second->excess_delay_slots, f.second->speed};
  p.norm = f.norm;
  p.validate();
  return p;
}

inline LossSpec make_loss(const ScenarioFile& f) {
  return f.loss == LossKind::Huber ? LossSpec::huber(f.huber_mu, f.speed)
                                   : LossSpec::squared();
}

inline LambdaSchedule make_schedule(const ScenarioFile& f, int slots) {
  switch (f.lambda) {
    case LambdaSpecKind::LinearDown: return LambdaSchedule::linear_down(slots);
    case LambdaSpecKind::LinearUp: return LambdaSchedule::linear_up(slots);
    case LambdaSpecKind::Constant:
      return LambdaSchedule::custom_values(
          std::vector<double>(static_cast<std::size_t>(slots), f.lambda_constant));
    case LambdaSpecKind::Custom: return LambdaSchedule::custom_values(f.lambda_values);
  }
  throw std::logic_error("make_schedule: unknown lambda kind");
}

inline OgdConfig make_ogd_config(const ScenarioFile& f, const Scenario& sc) {
  OgdConfig cfg;
  cfg.loss = make_loss(f);
  cfg.schedule = make_schedule(f, sc.horizon());
  cfg.gamma = f.gamma_mode == GammaMode::Auto
                  ? min_gamma(cfg.loss.strong_convexity(), region_diameter(sc), sc.speed)
                  : f.gamma_value;
  return cfg;
}

}  // namespace d2dplan::sim
