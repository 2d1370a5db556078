#include <sstream>

#include <nlohmann/json.hpp>

#include "scenforge/search.hpp"

namespace scenforge {

namespace {

void emit_vehicle(std::ostream& os, const VehicleState& v, bool with_slc) {
  os << "{\"pos\":\"" << rat_str(v.pos) << "\",\"lane\":" << v.lane << ",\"speed\":\""
     << rat_str(v.speed) << "\"";
  if (with_slc) os << ",\"slc\":" << v.steps_since_lane_change;
  os << "}";
}

VehicleState parse_vehicle(const nlohmann::json& o, bool with_slc) {
  VehicleState v;
  v.pos = rat_parse(o.at("pos").get<std::string>());
  v.lane = o.at("lane").get<int>();
  v.speed = rat_parse(o.at("speed").get<std::string>());
  v.steps_since_lane_change = with_slc ? o.at("slc").get<int>() : 0;
  return v;
}

ControlInput parse_input(const nlohmann::json& o) {
  return ControlInput{rat_parse(o.at("accel").get<std::string>()),
                      o.at("lane_delta").get<int>()};
}

}  // namespace

std::string trace_to_jsonl(const AbstractTrace& trace) {
  std::ostringstream os;
  os << "{\"schema\":\"scenforge.trace.v1\",\"spec_id\":\"" << trace.spec_id
     << "\",\"params_hash\":\"" << trace.params_hash << "\",\"first\":["
     << cell_number(trace.spec_first.car1_cell) << "," << cell_number(trace.spec_first.car2_cell)
     << "],\"second\":[" << cell_number(trace.spec_second.car1_cell) << ","
     << cell_number(trace.spec_second.car2_cell)
     << "],\"phase1_index\":" << trace.phase1_index
     << ",\"phase2_index\":" << trace.phase2_index << ",\"states\":" << trace.states.size()
     << ",\"inputs\":" << trace.inputs.size() << "}\n";
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    const WorldState& w = trace.states[i];
    os << "{\"step\":" << i << ",\"ego\":";
    emit_vehicle(os, w.ego, false);
    os << ",\"car1\":";
    emit_vehicle(os, w.car1, true);
    os << ",\"car2\":";
    emit_vehicle(os, w.car2, true);
    os << "}\n";
  }
  for (std::size_t i = 0; i < trace.inputs.size(); ++i) {
    const auto& [in1, in2] = trace.inputs[i];
    os << "{\"input_step\":" << i << ",\"car1\":{\"accel\":\"" << rat_str(in1.acceleration)
       << "\",\"lane_delta\":" << in1.lane_delta << "},\"car2\":{\"accel\":\""
       << rat_str(in2.acceleration) << "\",\"lane_delta\":" << in2.lane_delta << "}}\n";
  }
  return os.str();
}

AbstractTrace trace_from_jsonl(std::string_view text) {
  AbstractTrace trace;
  std::istringstream is{std::string(text)};
  std::string line;
  bool have_header = false;
  std::size_t n_states = 0, n_inputs = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json o = nlohmann::json::parse(line);
    if (!have_header) {
      if (o.value("schema", "") != "scenforge.trace.v1") {
        throw std::invalid_argument("trace file: missing or unknown schema header");
      }
      trace.spec_id = o.at("spec_id").get<std::string>();
      trace.params_hash = o.at("params_hash").get<std::string>();
      trace.spec_first = GridConfig{cell_from_number(o.at("first").at(0).get<int>()),
                                    cell_from_number(o.at("first").at(1).get<int>())};
      trace.spec_second = GridConfig{cell_from_number(o.at("second").at(0).get<int>()),
                                     cell_from_number(o.at("second").at(1).get<int>())};
      trace.phase1_index = o.at("phase1_index").get<int>();
      trace.phase2_index = o.at("phase2_index").get<int>();
      n_states = o.at("states").get<std::size_t>();
      n_inputs = o.at("inputs").get<std::size_t>();
      have_header = true;
      continue;
    }
    if (o.contains("step")) {
      WorldState w;
      w.step_index = o.at("step").get<int>();
      w.ego = parse_vehicle(o.at("ego"), false);
      w.car1 = parse_vehicle(o.at("car1"), true);
      w.car2 = parse_vehicle(o.at("car2"), true);
      trace.states.push_back(std::move(w));
    } else if (o.contains("input_step")) {
      trace.inputs.emplace_back(parse_input(o.at("car1")), parse_input(o.at("car2")));
    } else {
      throw std::invalid_argument("trace file: unrecognized line");
    }
  }
  if (!have_header) throw std::invalid_argument("trace file: empty");
  if (trace.states.size() != n_states || trace.inputs.size() != n_inputs) {
    throw std::invalid_argument("trace file: line counts disagree with header");
  }
  return trace;
}

namespace {

std::string veh_name(int i) { return i == 1 ? "car1" : "car2"; }

}  // namespace

ValidationResult validate_trace(const AbstractTrace& trace, const ScenarioSpec& spec,
                                const ModelParams& params) {
  auto fail = [](std::string msg) { return ValidationResult{false, std::move(msg)}; };

  const std::size_t n = trace.states.size();
  if (n < 2) return fail("trace has fewer than two states");
  if (trace.inputs.size() != n - 1) {
    return fail("input count " + std::to_string(trace.inputs.size()) +
                " does not match state count " + std::to_string(n));
  }
  if (trace.phase1_index < 0 || trace.phase2_index <= trace.phase1_index ||
      trace.phase2_index >= static_cast<int>(n)) {
    return fail("phase indices out of order or out of range");
  }

  const Rat dt = params.time_step;
  for (std::size_t t = 0; t + 1 < n; ++t) {
    const WorldState& cur = trace.states[t];
    const WorldState& nxt = trace.states[t + 1];
    const std::string at = "step " + std::to_string(t) + ": ";

    for (int car = 1; car <= 2; ++car) {
      const VehicleState& c = car == 1 ? cur.car1 : cur.car2;
      const VehicleState& cn = car == 1 ? nxt.car1 : nxt.car2;
      const ControlInput& in = car == 1 ? trace.inputs[t].first : trace.inputs[t].second;
      const int dl = cn.lane - c.lane;
      if (dl < -1 || dl > 1) return fail(at + veh_name(car) + " changes more than one lane");
      if (dl != in.lane_delta) {
        return fail(at + veh_name(car) + " lane delta disagrees with recorded input");
      }
      if (cn.lane < 0 || cn.lane > params.max_lane) {
        return fail(at + veh_name(car) + " lane out of range");
      }
      const bool changing = dl != 0;
      if (changing) {
        if (c.steps_since_lane_change < params.lane_change_spacing_steps) {
          return fail(at + veh_name(car) + " violates lane-change spacing (" +
                      std::to_string(c.steps_since_lane_change) + " < " +
                      std::to_string(params.lane_change_spacing_steps) + ")");
        }
        if (c.speed > params.max_lane_change_speed ||
            cn.speed > params.max_lane_change_speed) {
          return fail(at + veh_name(car) + " violates lane-change speed bound");
        }
        if (in.acceleration > params.max_lane_change_acceleration ||
            in.acceleration < -params.max_lane_change_braking) {
          return fail(at + veh_name(car) + " violates lane-change acceleration bound");
        }
      }
      Rat expect_speed = c.speed + in.acceleration * dt;
      if (expect_speed < Rat(0)) expect_speed = Rat(0);
      if (cn.speed != expect_speed) {
        return fail(at + veh_name(car) + " speed transition violated (expected " +
                    rat_str(expect_speed) + ", got " + rat_str(cn.speed) + ")");
      }
      if (cn.speed < params.non_ego_speed_min || cn.speed > params.non_ego_speed_max) {
        return fail(at + veh_name(car) + " speed outside non-ego bounds");
      }
      Rat expect_pos = c.pos + (c.speed + cn.speed) / Rat(2) * dt;
      if (changing) expect_pos = c.pos + (c.speed + cn.speed) / Rat(2) * dt *
                                             params.lane_change_pos_factor;
      if (cn.pos != expect_pos) {
        return fail(at + veh_name(car) + " position transition violated (expected " +
                    rat_str(expect_pos) + ", got " + rat_str(cn.pos) + ")");
      }
      int expect_slc = changing ? 0
                                : std::min(c.steps_since_lane_change + 1,
                                           params.lane_change_spacing_steps);
      if (cn.steps_since_lane_change != expect_slc) {
        return fail(at + veh_name(car) + " lane-change counter inconsistent");
      }
    }

    VehicleState expect_ego = ego_step(cur, params);
    if (nxt.ego.lane != cur.ego.lane) return fail(at + "ego changed lane");
    if (nxt.ego.speed != expect_ego.speed) {
      return fail(at + "ego speed transition violated (expected " +
                  rat_str(expect_ego.speed) + ", got " + rat_str(nxt.ego.speed) + ")");
    }
    if (nxt.ego.pos != expect_ego.pos) {
      return fail(at + "ego position transition violated (expected " +
                  rat_str(expect_ego.pos) + ", got " + rat_str(nxt.ego.pos) + ")");
    }
  }

  for (std::size_t t = 0; t < n; ++t) {
    auto violations = check_invariants(trace.states[t], params);
    if (!violations.empty()) {
      return fail("step " + std::to_string(t) + ": " + violations.front().describe());
    }
  }

  const GridBounds gen = GridBounds::generation();
  if (!config_holds(spec.first, trace.states[static_cast<std::size_t>(trace.phase1_index)],
                    gen)) {
    return fail("phase-1 predicate does not hold at step " +
                std::to_string(trace.phase1_index));
  }
  if (!config_holds(spec.second, trace.states[static_cast<std::size_t>(trace.phase2_index)],
                    gen)) {
    return fail("phase-2 predicate does not hold at step " +
                std::to_string(trace.phase2_index));
  }
  return ValidationResult{true, ""};
}

}  // namespace scenforge
