#include "scenforge/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace scenforge {

void SimConfig::validate() const {
  if (!(dt > 0)) throw std::invalid_argument("sim config: dt must be > 0");
  if (!(max_sim_time > 0)) throw std::invalid_argument("sim config: max_sim_time must be > 0");
  if (!(lane_width > 0) || !(vehicle_length > 0) || !(vehicle_width > 0)) {
    throw std::invalid_argument("sim config: dimensions must be > 0");
  }
}

void EgoAgentSpec::validate() const {
  if (dropout_prob < 0 || dropout_prob > 1) {
    throw std::invalid_argument("agent: dropout_prob must be in [0, 1]");
  }
  if (detection_latency < 0) throw std::invalid_argument("agent: latency must be >= 0");
}

std::string EgoAgentSpec::to_string() const {
  if (kind == Kind::OracleAcc) return "oracle";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "faulty:%.2f:%.2f", dropout_prob, detection_latency);
  return buf;
}

EgoAgentSpec EgoAgentSpec::parse(std::string_view text) {
  EgoAgentSpec spec;
  if (text == "oracle") {
    spec.kind = Kind::OracleAcc;
    return spec;
  }
  if (text.rfind("faulty:", 0) == 0) {
    spec.kind = Kind::FaultyPerceptionAcc;
    std::string rest(text.substr(7));
    auto colon = rest.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("agent: expected faulty:<dropout>:<latency>");
    }
    spec.dropout_prob = std::stod(rest.substr(0, colon));
    spec.detection_latency = std::stod(rest.substr(colon + 1));
    spec.validate();
    return spec;
  }
  throw std::invalid_argument("agent: unknown spec '" + std::string(text) +
                              "', expected \"oracle\" or \"faulty:<dropout>:<latency>\"");
}

namespace {

int nearest_lane(double y, const SimConfig& cfg, int max_lane) {
  int lane = static_cast<int>(std::lround(y / cfg.lane_width));
  return std::clamp(lane, 0, max_lane);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double smooth_step(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

constexpr double kCarAccelClamp = 6.0;   // m/s^2, non-ego speed controller
constexpr double kSpeedGain = 2.0;       // 1/s
constexpr double kStandstillSpeed = 0.02;  // m/s, treat as halted
constexpr double kStandoff = 1.0;        // m kept beyond one vehicle length

// Executes one behavior program; longitudinal proportional speed control,
// smooth-step lateral profile over the first maneuver_distance meters of a
// lane change.
struct CarExec {
  const BehaviorProgram* prog = nullptr;
  double x = 0, y = 0, v = 0;
  double lane_width = 3.5;
  std::size_t node = 0;
  double node_dist = 0;
  double stand_elapsed = 0;
  double y_node_start = 0;

  bool done() const { return node >= prog->nodes.size(); }

  void next_node() {
    ++node;
    node_dist = 0;
    stand_elapsed = 0;
    y_node_start = y;
  }

  void control_speed(double target, double dt) {
    double a = std::clamp(kSpeedGain * (target - v), -kCarAccelClamp, kCarAccelClamp);
    double v2 = std::max(v + a * dt, 0.0);
    double ds = 0.5 * (v + v2) * dt;
    x += ds;
    node_dist += ds;
    v = v2;
  }

  void advance(double dt) {
    if (done()) {
      x += v * dt;  // program over: coast
      return;
    }
    const BehaviorNode& n = prog->nodes[node];
    if (const auto* d = std::get_if<DriveNode>(&n)) {
      control_speed(d->target_speed, dt);
      if (node_dist >= d->distance - 1e-9 ||
          (d->target_speed == 0 && v < kStandstillSpeed)) {
        if (d->target_speed == 0 && v < kStandstillSpeed) v = 0;
        next_node();
      }
    } else if (const auto* lc = std::get_if<LaneChangeNode>(&n)) {
      control_speed(lc->speed, dt);
      double span = std::max(lc->maneuver_distance, 1e-6);
      double u = smooth_step(std::min(node_dist, lc->maneuver_distance) / span);
      y = y_node_start + lc->direction * lane_width * u;
      if (node_dist >= lc->total_distance - 1e-9) {
        y = y_node_start + lc->direction * lane_width;
        next_node();
      }
    } else {
      v = 0;
      stand_elapsed += dt;
      if (stand_elapsed >= std::get<StandStillNode>(n).duration - 1e-9) next_node();
    }
  }
};

struct EgoPolicy {
  double cruise, max_acc, max_brk, brk_pos, dt, lane_width, vehicle_length;

  bool triggered(const EgoObservation& obs, double ego_x, double ego_y, double v_test) const {
    if (v_test <= 0) return false;
    for (const ObservedCar& car : obs.cars) {
      if (car.x < ego_x) continue;
      if (std::abs(car.y - ego_y) >= lane_width) continue;
      double gap = car.x - ego_x - (vehicle_length + kStandoff);
      if (gap <= v_test * v_test / brk_pos) return true;
    }
    return false;
  }

  double accel(const EgoObservation& obs, double ego_x, double ego_y, double v) const {
    if (triggered(obs, ego_x, ego_y, v)) return max_brk;
    double cand = v < cruise ? std::min(max_acc, (cruise - v) / dt) : 0.0;
    if (cand > 0 && triggered(obs, ego_x, ego_y, v + cand * dt)) return 0.0;
    return cand;
  }
};

std::uint8_t pair_code(int a, int b) { return static_cast<std::uint8_t>(a * 4 + b); }

}  // namespace

Perception::Perception(const EgoAgentSpec& agent, const SimConfig& cfg)
    : agent_(agent), dt_(cfg.dt), rng_(cfg.rng_seed) {
  latency_ticks_ = static_cast<int>(std::ceil(agent.detection_latency / cfg.dt - 1e-9));
  if (latency_ticks_ < 0) latency_ticks_ = 0;
}

EgoObservation Perception::observe(const TraceSample& truth) {
  EgoObservation obs;
  if (agent_.kind == EgoAgentSpec::Kind::OracleAcc) {
    for (int id = 1; id <= 2; ++id) {
      const VehicleSample& v = truth.veh[static_cast<std::size_t>(id)];
      obs.cars.push_back({id, v.x, v.y, v.speed});
    }
    return obs;
  }
  history_.push_back(truth);
  const int idx = static_cast<int>(history_.size()) - 1 - latency_ticks_;
  for (int id = 1; id <= 2; ++id) {
    const bool dropped = uniform01(rng_) < agent_.dropout_prob;
    if (dropped || idx < 0) continue;
    const VehicleSample& v = history_[static_cast<std::size_t>(idx)].veh[static_cast<std::size_t>(id)];
    obs.cars.push_back({id, v.x, v.y, v.speed});
  }
  return obs;
}

std::vector<CollisionEvent> detect_collisions(const TraceSample& sample, const SimConfig& cfg) {
  std::vector<CollisionEvent> out;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const VehicleSample& a = sample.veh[static_cast<std::size_t>(i)];
      const VehicleSample& b = sample.veh[static_cast<std::size_t>(j)];
      if (std::abs(a.x - b.x) >= cfg.vehicle_length) continue;
      if (std::abs(a.y - b.y) >= cfg.vehicle_width) continue;
      CollisionEvent ev;
      ev.t = sample.t;
      ev.pair = {i, j};
      if (i == 0 && b.x >= a.x && b.lane == a.lane) {
        ev.kind = CollisionEvent::Kind::Frontal;
      } else {
        ev.kind = CollisionEvent::Kind::Other;
      }
      out.push_back(ev);
    }
  }
  return out;
}

std::vector<CollisionEvent> derive_events(const ConcreteTrace& trace, const SimConfig& cfg) {
  std::vector<CollisionEvent> events;
  std::set<std::uint8_t> active;
  for (const TraceSample& s : trace.samples) {
    std::set<std::uint8_t> now;
    for (const CollisionEvent& ev : detect_collisions(s, cfg)) {
      std::uint8_t code = pair_code(ev.pair[0], ev.pair[1]);
      now.insert(code);
      if (!active.count(code)) events.push_back(ev);
    }
    active = std::move(now);
  }
  return events;
}

ConcreteTrace run(const ConcreteScenario& scenario, const EgoAgentSpec& agent,
                  const SimConfig& cfg, const ModelParams& params) {
  cfg.validate();
  agent.validate();
  params.validate();

  const double dt = cfg.dt;
  EgoPolicy policy{rat_to_double(params.ego_cruise_speed),
                   rat_to_double(params.max_acceleration),
                   rat_to_double(params.max_braking),
                   -rat_to_double(params.max_braking),
                   dt,
                   cfg.lane_width,
                   cfg.vehicle_length};
  Perception perception(agent, cfg);

  double ego_x = scenario.ego_pos;
  const double ego_y = scenario.ego_lane * cfg.lane_width;
  double ego_v = 0;

  CarExec cars[2];
  for (int i = 0; i < 2; ++i) {
    const BehaviorProgram& p = scenario.programs[static_cast<std::size_t>(i)];
    cars[i].prog = &p;
    cars[i].x = p.initial_offset;
    cars[i].y = p.initial_lane * cfg.lane_width;
    cars[i].y_node_start = cars[i].y;
    cars[i].lane_width = cfg.lane_width;
  }

  ConcreteTrace trace;
  std::set<std::uint8_t> active_overlaps;

  auto make_sample = [&](double t, double throttle, double brake) {
    TraceSample s;
    s.t = t;
    s.veh[0] = {ego_x, ego_y, nearest_lane(ego_y, cfg, params.max_lane), ego_v};
    for (int i = 0; i < 2; ++i) {
      s.veh[static_cast<std::size_t>(i + 1)] = {cars[i].x, cars[i].y,
                                                nearest_lane(cars[i].y, cfg, params.max_lane),
                                                cars[i].v};
    }
    s.throttle = throttle;
    s.brake = brake;
    return s;
  };

  {
    TraceSample spawn = make_sample(0, 0, 0);
    if (!detect_collisions(spawn, cfg).empty()) {
      throw ScenarioUnrunnable("vehicles overlap at spawn in " + scenario.scenario_id);
    }
  }

  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    TraceSample sample = make_sample(t, 0, 0);
    EgoObservation obs = perception.observe(sample);
    const double a_ego = policy.accel(obs, ego_x, ego_y, ego_v);
    if (a_ego >= 0) {
      sample.throttle = policy.max_acc > 0 ? a_ego / policy.max_acc : 0;
      sample.brake = 0;
    } else {
      sample.throttle = 0;
      sample.brake = a_ego / policy.max_brk;
    }
    trace.samples.push_back(sample);

    std::set<std::uint8_t> now;
    for (const CollisionEvent& ev : detect_collisions(sample, cfg)) {
      std::uint8_t code = pair_code(ev.pair[0], ev.pair[1]);
      now.insert(code);
      if (!active_overlaps.count(code)) trace.events.push_back(ev);
    }
    active_overlaps = std::move(now);

    if ((cars[0].done() && cars[1].done()) || t >= cfg.max_sim_time - 1e-9) break;

    cars[0].advance(dt);
    cars[1].advance(dt);
    double ego_v2 = std::max(ego_v + a_ego * dt, 0.0);
    ego_x += 0.5 * (ego_v + ego_v2) * dt;
    ego_v = ego_v2;
  }
  return trace;
}

namespace {

const char* veh_label(int i) { return i == 0 ? "ego" : (i == 1 ? "car1" : "car2"); }

int veh_index(std::string_view name) {
  if (name == "ego") return 0;
  if (name == "car1") return 1;
  if (name == "car2") return 2;
  throw std::invalid_argument("trace csv: unknown vehicle '" + std::string(name) + "'");
}

const char* event_kind_label(CollisionEvent::Kind k) {
  return k == CollisionEvent::Kind::Frontal ? "frontal_collision" : "other_collision";
}

}  // namespace

std::string trace_to_csv(const ConcreteTrace& trace) {
  std::ostringstream os;
  os << "t,veh,x,y,lane,speed,throttle,brake\n";
  char buf[160];
  for (const TraceSample& s : trace.samples) {
    for (int i = 0; i < 3; ++i) {
      const VehicleSample& v = s.veh[static_cast<std::size_t>(i)];
      std::snprintf(buf, sizeof(buf), "%.2f,%s,%.4f,%.4f,%d,%.4f,%.3f,%.3f\n", s.t,
                    veh_label(i), v.x, v.y, v.lane, v.speed, i == 0 ? s.throttle : 0.0,
                    i == 0 ? s.brake : 0.0);
      os << buf;
    }
  }
  return os.str();
}

ConcreteTrace trace_from_csv(std::string_view csv_text) {
  std::istringstream is{std::string(csv_text)};
  std::string line;
  if (!std::getline(is, line) || line != "t,veh,x,y,lane,speed,throttle,brake") {
    throw std::invalid_argument("trace csv: bad or missing header");
  }
  ConcreteTrace trace;
  TraceSample current;
  int seen = 0;
  bool have_any = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::array<std::string, 8> f;
    std::size_t start = 0;
    for (int i = 0; i < 8; ++i) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos && i < 7) {
        throw std::invalid_argument("trace csv: expected 8 fields: " + line);
      }
      f[static_cast<std::size_t>(i)] =
          line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      start = comma + 1;
    }
    double t = std::stod(f[0]);
    int idx = veh_index(f[1]);
    if (seen == 0) {
      current = TraceSample{};
      current.t = t;
    } else if (std::abs(current.t - t) > 1e-9) {
      throw std::invalid_argument("trace csv: incomplete sample block at t");
    }
    VehicleSample v;
    v.x = std::stod(f[2]);
    v.y = std::stod(f[3]);
    v.lane = std::stoi(f[4]);
    v.speed = std::stod(f[5]);
    current.veh[static_cast<std::size_t>(idx)] = v;
    if (idx == 0) {
      current.throttle = std::stod(f[6]);
      current.brake = std::stod(f[7]);
    }
    if (++seen == 3) {
      trace.samples.push_back(current);
      seen = 0;
      have_any = true;
    }
  }
  if (seen != 0) throw std::invalid_argument("trace csv: trailing partial sample");
  if (!have_any) throw std::invalid_argument("trace csv: no samples");
  return trace;
}

std::string events_to_json(const std::vector<CollisionEvent>& events) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const CollisionEvent& ev : events) {
    nlohmann::ordered_json o;
    char tbuf[32];
    std::snprintf(tbuf, sizeof(tbuf), "%.2f", ev.t);
    o["t"] = std::stod(tbuf);
    o["kind"] = event_kind_label(ev.kind);
    o["pair"] = {veh_label(ev.pair[0]), veh_label(ev.pair[1])};
    arr.push_back(std::move(o));
  }
  nlohmann::ordered_json root;
  root["events"] = std::move(arr);
  return root.dump(2) + "\n";
}

std::vector<CollisionEvent> events_from_json(std::string_view text) {
  nlohmann::json root = nlohmann::json::parse(text);
  std::vector<CollisionEvent> events;
  for (const auto& o : root.at("events")) {
    CollisionEvent ev;
    ev.t = o.at("t").get<double>();
    std::string kind = o.at("kind").get<std::string>();
    ev.kind = kind == "frontal_collision" ? CollisionEvent::Kind::Frontal
                                          : CollisionEvent::Kind::Other;
    ev.pair = {veh_index(o.at("pair").at(0).get<std::string>()),
               veh_index(o.at("pair").at(1).get<std::string>())};
    events.push_back(ev);
  }
  return events;
}

}  // namespace scenforge
