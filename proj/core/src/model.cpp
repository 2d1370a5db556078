#include "scenforge/model.hpp"

#include <algorithm>
#include <sstream>

namespace scenforge {

void ModelParams::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("model params: " + msg); };
  if (time_step <= Rat(0)) fail("time_step must be > 0");
  if (!(max_braking < Rat(0))) fail("max_braking must be < 0");
  if (!(max_acceleration > Rat(0))) fail("max_acceleration must be > 0");
  if (!(safe_distance > Rat(0))) fail("safe_distance must be > 0");
  if (non_ego_speed_min < Rat(0)) fail("non_ego_speed_min must be >= 0");
  if (non_ego_speed_max < non_ego_speed_min) fail("non_ego speed bounds out of order");
  if (max_lane < 2) fail("max_lane must be >= 2 (ego needs a lane on each side)");
  if (ego_cruise_speed < Rat(0)) fail("ego_cruise_speed must be >= 0");
  if (max_lane_change_speed < Rat(0)) fail("max_lane_change_speed must be >= 0");
  if (max_lane_change_acceleration < Rat(0)) fail("max_lane_change_acceleration must be >= 0");
  if (max_lane_change_braking < Rat(0)) fail("max_lane_change_braking must be >= 0 (magnitude)");
  if (lane_change_spacing_steps < 0) fail("lane_change_spacing_steps must be >= 0");
  if (!(lane_change_pos_factor > Rat(0)) || lane_change_pos_factor > Rat(1)) {
    fail("lane_change_pos_factor must be in (0, 1]");
  }
}

std::string ModelParams::hash() const {
  std::ostringstream os;
  os << "dt=" << rat_str(time_step) << ";cruise=" << rat_str(ego_cruise_speed)
     << ";smin=" << rat_str(non_ego_speed_min) << ";smax=" << rat_str(non_ego_speed_max)
     << ";acc=" << rat_str(max_acceleration) << ";brk=" << rat_str(max_braking)
     << ";safe=" << rat_str(safe_distance) << ";lanes=" << max_lane
     << ";lcs=" << rat_str(max_lane_change_speed)
     << ";lca=" << rat_str(max_lane_change_acceleration)
     << ";lcb=" << rat_str(max_lane_change_braking)
     << ";spacing=" << lane_change_spacing_steps
     << ";factor=" << rat_str(lane_change_pos_factor);
  return fnv1a_hex(os.str());
}

const char* step_constraint_name(StepConstraint c) {
  switch (c) {
    case StepConstraint::LaneOutOfRange: return "lane out of range";
    case StepConstraint::LaneChangeSpacing: return "lane change spacing";
    case StepConstraint::LaneChangeSpeed: return "lane change speed";
    case StepConstraint::LaneChangeNextSpeed: return "lane change next speed";
    case StepConstraint::LaneChangeAcceleration: return "lane change acceleration";
    case StepConstraint::SpeedBelowMin: return "speed below minimum";
    case StepConstraint::SpeedAboveMax: return "speed above maximum";
  }
  return "unknown";
}

bool try_step_vehicle(const VehicleState& state, const ControlInput& input,
                      const ModelParams& params, VehicleState* out,
                      StepConstraint* violated) {
  auto reject = [&](StepConstraint c) {
    if (violated) *violated = c;
    return false;
  };

  const bool changing = input.lane_delta != 0;
  if (changing) {
    int next_lane = state.lane + input.lane_delta;
    if (next_lane < 0 || next_lane > params.max_lane) {
      return reject(StepConstraint::LaneOutOfRange);
    }
    if (state.steps_since_lane_change < params.lane_change_spacing_steps) {
      return reject(StepConstraint::LaneChangeSpacing);
    }
    if (state.speed > params.max_lane_change_speed) {
      return reject(StepConstraint::LaneChangeSpeed);
    }
    if (input.acceleration > params.max_lane_change_acceleration ||
        input.acceleration < -params.max_lane_change_braking) {
      return reject(StepConstraint::LaneChangeAcceleration);
    }
  }

  Rat next_speed = state.speed + input.acceleration * params.time_step;
  if (next_speed < Rat(0)) next_speed = Rat(0);
  if (changing && next_speed > params.max_lane_change_speed) {
    return reject(StepConstraint::LaneChangeNextSpeed);
  }
  if (next_speed < params.non_ego_speed_min) return reject(StepConstraint::SpeedBelowMin);
  if (next_speed > params.non_ego_speed_max) return reject(StepConstraint::SpeedAboveMax);

  Rat delta = (state.speed + next_speed) / Rat(2) * params.time_step;
  if (changing) delta *= params.lane_change_pos_factor;

  if (out) {
    out->pos = state.pos + delta;
    out->lane = state.lane + input.lane_delta;
    out->speed = next_speed;
    out->steps_since_lane_change =
        changing ? 0
                 : std::min(state.steps_since_lane_change + 1,
                            params.lane_change_spacing_steps);
  }
  return true;
}

VehicleState step_vehicle(const VehicleState& state, const ControlInput& input,
                          const ModelParams& params) {
  VehicleState next;
  StepConstraint violated{};
  if (!try_step_vehicle(state, input, params, &next, &violated)) {
    throw PreconditionViolated(violated);
  }
  return next;
}

bool collision_next(const VehicleState& ego, const VehicleState& car,
                    const ModelParams& params) {
  if (car.lane != ego.lane) return false;
  if (car.pos < ego.pos) return false;
  if (!(ego.speed > Rat(0))) return false;
  // (car.pos - ego.pos) / speed <= speed / (-max_braking)
  Rat time_to_stop = ego.speed / (-params.max_braking);
  return (car.pos - ego.pos) / ego.speed <= time_to_stop;
}

VehicleState ego_step(const WorldState& world, const ModelParams& params) {
  const VehicleState& ego = world.ego;
  Rat next_speed;
  if (collision_next(ego, world.car1, params) || collision_next(ego, world.car2, params)) {
    next_speed = ego.speed + params.max_braking * params.time_step;
    if (next_speed < Rat(0)) next_speed = Rat(0);
  } else if (ego.speed < params.ego_cruise_speed) {
    next_speed = std::min(params.ego_cruise_speed,
                          ego.speed + params.max_acceleration * params.time_step);
  } else {
    // Above-cruise with no obstacle is only possible transiently at init; coast.
    next_speed = ego.speed;
  }
  VehicleState next = ego;
  next.pos = ego.pos + (ego.speed + next_speed) / Rat(2) * params.time_step;
  next.speed = next_speed;
  return next;
}

std::string InvariantViolation::describe() const {
  auto name = [](int v) { return v == 0 ? "ego" : (v == 1 ? "car1" : "car2"); };
  std::ostringstream os;
  os << "unsafe same-lane gap between " << name(first_vehicle) << " and "
     << name(second_vehicle) << " (|gap| = " << rat_str(gap) << ")";
  return os.str();
}

std::vector<InvariantViolation> check_invariants(const WorldState& world,
                                                 const ModelParams& params) {
  const VehicleState* vs[3] = {&world.ego, &world.car1, &world.car2};
  std::vector<InvariantViolation> out;
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      if (vs[a]->lane != vs[b]->lane) continue;
      Rat gap = vs[a]->pos - vs[b]->pos;
      if (gap < Rat(0)) gap = -gap;
      if (!(gap > params.safe_distance)) out.push_back({a, b, gap});
    }
  }
  return out;
}

WorldState initial_world(const ModelParams& params) {
  WorldState w;
  int mid = params.ego_lane();
  w.ego.lane = mid;
  w.car1.lane = mid - 1;
  w.car2.lane = mid + 1;
  w.car1.steps_since_lane_change = params.lane_change_spacing_steps;
  w.car2.steps_since_lane_change = params.lane_change_spacing_steps;
  w.step_index = 0;
  return w;
}

WorldState advance_world(const WorldState& world, const ControlInput& car1_input,
                         const ControlInput& car2_input, const ModelParams& params) {
  WorldState next;
  next.ego = ego_step(world, params);
  next.car1 = step_vehicle(world.car1, car1_input, params);
  next.car2 = step_vehicle(world.car2, car2_input, params);
  next.step_index = world.step_index + 1;
  return next;
}

}  // namespace scenforge
