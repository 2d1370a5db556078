#include "scenforge/concretize.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace scenforge {

std::vector<double> offsets() { return {-3.5, 0.0, 3.5}; }

namespace {

std::string format_offset(double offset) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.1f", offset);
  return buf;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

BehaviorProgram build_program(const AbstractTrace& trace, int car, double offset,
                              double step_seconds) {
  const auto& states = trace.states;
  BehaviorProgram prog;
  prog.vehicle_id = car;
  prog.initial_lane = states.front().car(car).lane;
  prog.initial_offset = rat_to_double(states.front().car(car).pos) + offset;

  int standing_states = states.front().car(car).speed == Rat(0) ? 1 : 0;

  auto flush_standstill = [&](std::vector<BehaviorNode>& nodes) {
    if (standing_states > 0) {
      nodes.push_back(StandStillNode{standing_states * step_seconds});
      standing_states = 0;
    }
  };

  for (std::size_t t = 0; t + 1 < states.size(); ++t) {
    const VehicleState& prev = states[t].car(car);
    const VehicleState& next = states[t + 1].car(car);
    const int dl = next.lane - prev.lane;
    if (dl < -1 || dl > 1) {
      throw InvalidTrace("car" + std::to_string(car) + " jumps more than one lane at step " +
                         std::to_string(t));
    }
    if (dl != 0) {
      flush_standstill(prog.nodes);
      prog.nodes.push_back(
          LaneChangeNode{dl < 0 ? -1 : +1, rat_to_double(next.speed), 9.0, 12.0});
      if (next.speed == Rat(0)) standing_states = 1;
    } else if (prev.speed == Rat(0) && next.speed == Rat(0)) {
      ++standing_states;
    } else {
      flush_standstill(prog.nodes);
      const double dist = rat_to_double(next.pos - prev.pos);
      if (dist > 0) {
        prog.nodes.push_back(DriveNode{rat_to_double(next.speed), dist});
      }
      if (next.speed == Rat(0)) standing_states = 1;
    }
  }
  flush_standstill(prog.nodes);
  return prog;
}

void merge_drive_nodes(BehaviorProgram& prog) {
  std::vector<BehaviorNode> merged;
  for (const BehaviorNode& node : prog.nodes) {
    if (!merged.empty() && std::holds_alternative<DriveNode>(node) &&
        std::holds_alternative<DriveNode>(merged.back())) {
      auto& prev = std::get<DriveNode>(merged.back());
      const auto& cur = std::get<DriveNode>(node);
      if (prev.target_speed == cur.target_speed) {
        prev.distance += cur.distance;
        continue;
      }
    }
    merged.push_back(node);
  }
  prog.nodes = std::move(merged);
}

}  // namespace

ConcreteScenario concretize(const AbstractTrace& trace, double offset,
                            const ConcretizeOptions& options) {
  if (trace.states.empty()) throw InvalidTrace("trace has no states");
  if (trace.inputs.size() + 1 != trace.states.size()) {
    throw InvalidTrace("trace input count does not match state count");
  }

  ConcreteScenario s;
  s.spec_id = trace.spec_id;
  s.offset_variant = offset;
  s.scenario_id = trace.spec_id + "__o" + format_offset(offset);
  s.programs[0] = build_program(trace, 1, offset, options.step_seconds);
  s.programs[1] = build_program(trace, 2, offset, options.step_seconds);
  if (options.merge_drives) {
    merge_drive_nodes(s.programs[0]);
    merge_drive_nodes(s.programs[1]);
  }
  s.ego_lane = trace.states.front().ego.lane;
  s.ego_pos = rat_to_double(trace.states.front().ego.pos);
  s.ego_route_length =
      rat_to_double(trace.states.back().ego.pos - trace.states.front().ego.pos) + 50.0;
  return s;
}

namespace {

void emit_node(std::ostream& os, const BehaviorNode& node) {
  if (const auto* d = std::get_if<DriveNode>(&node)) {
    os << "{\"kind\":\"drive\",\"target_speed\":" << fixed2(d->target_speed)
       << ",\"distance\":" << fixed2(d->distance) << "}";
  } else if (const auto* lc = std::get_if<LaneChangeNode>(&node)) {
    os << "{\"kind\":\"lane_change\",\"direction\":\""
       << (lc->direction < 0 ? "left" : "right") << "\",\"speed\":" << fixed2(lc->speed)
       << ",\"maneuver_distance\":" << fixed2(lc->maneuver_distance)
       << ",\"total_distance\":" << fixed2(lc->total_distance) << "}";
  } else {
    os << "{\"kind\":\"stand_still\",\"duration\":"
       << fixed2(std::get<StandStillNode>(node).duration) << "}";
  }
}

}  // namespace

std::string scenario_to_json(const ConcreteScenario& s) {
  std::ostringstream os;
  os << "{\"scenario_id\":\"" << s.scenario_id << "\",\"spec_id\":\"" << s.spec_id
     << "\",\"offset\":" << fixed2(s.offset_variant) << ",\"ego\":{\"lane\":" << s.ego_lane
     << ",\"pos\":" << fixed2(s.ego_pos) << ",\"route_length\":" << fixed2(s.ego_route_length)
     << "},\"non_egos\":[";
  for (int i = 0; i < 2; ++i) {
    const BehaviorProgram& p = s.programs[static_cast<std::size_t>(i)];
    if (i) os << ",";
    os << "{\"id\":\"car" << p.vehicle_id << "\",\"lane\":" << p.initial_lane
       << ",\"pos\":" << fixed2(p.initial_offset) << ",\"nodes\":[";
    for (std::size_t k = 0; k < p.nodes.size(); ++k) {
      if (k) os << ",";
      emit_node(os, p.nodes[k]);
    }
    os << "]}";
  }
  os << "]}\n";
  return os.str();
}

ConcreteScenario scenario_from_json(std::string_view text) {
  nlohmann::json o = nlohmann::json::parse(text);
  ConcreteScenario s;
  s.scenario_id = o.at("scenario_id").get<std::string>();
  s.spec_id = o.at("spec_id").get<std::string>();
  s.offset_variant = o.at("offset").get<double>();
  s.ego_lane = o.at("ego").at("lane").get<int>();
  s.ego_pos = o.at("ego").at("pos").get<double>();
  s.ego_route_length = o.at("ego").at("route_length").get<double>();
  const auto& cars = o.at("non_egos");
  if (cars.size() != 2) throw std::invalid_argument("scenario: expected two non-egos");
  for (std::size_t i = 0; i < 2; ++i) {
    BehaviorProgram& p = s.programs[i];
    const auto& c = cars.at(i);
    std::string id = c.at("id").get<std::string>();
    p.vehicle_id = id == "car1" ? 1 : 2;
    p.initial_lane = c.at("lane").get<int>();
    p.initial_offset = c.at("pos").get<double>();
    for (const auto& n : c.at("nodes")) {
      std::string kind = n.at("kind").get<std::string>();
      if (kind == "drive") {
        p.nodes.push_back(DriveNode{n.at("target_speed").get<double>(),
                                    n.at("distance").get<double>()});
      } else if (kind == "lane_change") {
        p.nodes.push_back(LaneChangeNode{n.at("direction").get<std::string>() == "left" ? -1 : +1,
                                         n.at("speed").get<double>(),
                                         n.at("maneuver_distance").get<double>(),
                                         n.at("total_distance").get<double>()});
      } else if (kind == "stand_still") {
        p.nodes.push_back(StandStillNode{n.at("duration").get<double>()});
      } else {
        throw std::invalid_argument("scenario: unknown node kind '" + kind + "'");
      }
    }
  }
  return s;
}

std::string export_scenariorunner_script(const ConcreteScenario& s) {
  std::ostringstream os;
  os << "# generated scenario behavior: " << s.scenario_id << "\n"
     << "# ego: lane " << s.ego_lane << ", spawn " << fixed2(s.ego_pos) << " m, route "
     << fixed2(s.ego_route_length) << " m (driven by the agent under test)\n"
     << "import py_trees\n"
     << "from srunner.scenariomanager.scenarioatomics.atomic_behaviors import (\n"
     << "    WaypointFollower, LaneChange, StopVehicle)\n"
     << "from srunner.scenariomanager.scenarioatomics.atomic_trigger_conditions import (\n"
     << "    DriveDistance, StandStill)\n\n";
  for (const BehaviorProgram& p : s.programs) {
    const std::string car = "car" + std::to_string(p.vehicle_id);
    os << "def build_" << car << "_behavior(" << car << "):\n"
       << "    # spawn: lane " << p.initial_lane << ", " << fixed2(p.initial_offset)
       << " m\n"
       << "    seq = py_trees.composites.Sequence(\"" << car << "_behavior\")\n";
    int idx = 0;
    for (const BehaviorNode& node : p.nodes) {
      ++idx;
      const std::string name = "node_" + std::to_string(idx);
      if (const auto* d = std::get_if<DriveNode>(&node)) {
        os << "    # drive straight forward for " << fixed2(d->distance)
           << " m, with a speed of " << fixed2(d->target_speed) << " m/s\n"
           << "    " << name << " = py_trees.composites.Parallel(\n"
           << "        \"drive_" << idx
           << "\", policy=py_trees.common.ParallelPolicy.SUCCESS_ON_ONE)\n"
           << "    " << name << ".add_child(WaypointFollower(" << car << ", "
           << fixed2(d->target_speed) << "))\n"
           << "    " << name << ".add_child(DriveDistance(" << car << ", "
           << fixed2(d->distance) << "))\n";
      } else if (const auto* lc = std::get_if<LaneChangeNode>(&node)) {
        const char* dir = lc->direction < 0 ? "left" : "right";
        os << "    # change lane " << dir << " at " << fixed2(lc->speed) << " m/s, "
           << fixed2(lc->maneuver_distance) << " m while crossing, " << fixed2(lc->total_distance)
           << " m total\n"
           << "    " << name << " = py_trees.composites.Parallel(\n"
           << "        \"lane_change_" << idx
           << "\", policy=py_trees.common.ParallelPolicy.SUCCESS_ON_ONE)\n"
           << "    " << name << ".add_child(LaneChange(" << car << ", speed=" << fixed2(lc->speed)
           << ", direction='" << dir << "', distance_lane_change="
           << fixed2(lc->maneuver_distance) << "))\n"
           << "    " << name << ".add_child(DriveDistance(" << car << ", "
           << fixed2(lc->total_distance) << "))\n";
      } else {
        const auto& ss = std::get<StandStillNode>(node);
        os << "    # stand still for " << fixed2(ss.duration) << " s\n"
           << "    " << name << " = py_trees.composites.Parallel(\n"
           << "        \"stand_still_" << idx
           << "\", policy=py_trees.common.ParallelPolicy.SUCCESS_ON_ONE)\n"
           << "    " << name << ".add_child(StopVehicle(" << car << ", 1.0))\n"
           << "    " << name << ".add_child(StandStill(" << car << ", name=\"stand_still_"
           << idx << "\", duration=" << fixed2(ss.duration) << "))\n";
      }
      os << "    seq.add_child(" << name << ")\n";
    }
    os << "    return seq\n\n";
  }
  return os.str();
}

}  // namespace scenforge
