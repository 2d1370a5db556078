#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "scenforge/rational.hpp"

namespace scenforge {

/// Parameters of the discrete-time symbolic highway model. All quantities are
/// exact rationals except lane/step counts.
struct ModelParams {
  Rat time_step = Rat(1);              // s per abstract transition
  Rat ego_cruise_speed = Rat(5);       // m/s
  Rat non_ego_speed_min = Rat(0);      // m/s
  Rat non_ego_speed_max = Rat(12);     // m/s
  Rat max_acceleration = Rat(28, 5);   // 5.6 m/s^2
  Rat max_braking = Rat(-23, 5);       // -4.6 m/s^2
  Rat safe_distance = Rat(7);          // m, strict pairwise separation in-lane
  int max_lane = 2;                    // lanes 0..max_lane, 0 is leftmost

  // Side constraints that apply only while a non-ego changes lane.
  Rat max_lane_change_speed = Rat(10);         // m/s
  Rat max_lane_change_acceleration = Rat(2);   // m/s^2
  Rat max_lane_change_braking = Rat(2);        // m/s^2, magnitude
  int lane_change_spacing_steps = 6;           // min steps between lane changes
  Rat lane_change_pos_factor = Rat(19, 20);    // 0.95 position factor while changing

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;

  /// Middle lane the ego is pinned to.
  int ego_lane() const { return max_lane / 2; }

  /// Stable hex digest of the canonical parameter serialization.
  std::string hash() const;
};

struct VehicleState {
  Rat pos = Rat(0);    // longitudinal, m
  int lane = 0;
  Rat speed = Rat(0);  // m/s, never negative
  // Saturating counter; only meaningful for non-egos. Starts saturated so a
  // lane change is allowed at t=0.
  int steps_since_lane_change = 0;

  bool operator==(const VehicleState&) const = default;
};

struct ControlInput {
  Rat acceleration = Rat(0);  // m/s^2
  int lane_delta = 0;         // -1 (left), 0, +1 (right)

  bool operator==(const ControlInput&) const = default;
};

struct WorldState {
  VehicleState ego;
  VehicleState car1;
  VehicleState car2;
  int step_index = 0;

  bool operator==(const WorldState&) const = default;

  const VehicleState& car(int id) const { return id == 1 ? car1 : car2; }
};

/// Which transition-relation constraint a rejected step violated.
enum class StepConstraint {
  LaneOutOfRange,
  LaneChangeSpacing,
  LaneChangeSpeed,
  LaneChangeNextSpeed,
  LaneChangeAcceleration,
  SpeedBelowMin,
  SpeedAboveMax,
};

const char* step_constraint_name(StepConstraint c);

class PreconditionViolated : public std::runtime_error {
 public:
  explicit PreconditionViolated(StepConstraint which)
      : std::runtime_error(std::string("transition precondition violated: ") +
                           step_constraint_name(which)),
        which_(which) {}
  StepConstraint which() const { return which_; }

 private:
  StepConstraint which_;
};

/// Advances one non-ego vehicle by one abstract step.
///   speed' = max(speed + a*dt, 0)
///   pos'   = pos + (speed+speed')/2*dt, times the lane-change factor when turning
/// Throws PreconditionViolated when a transition constraint fails; the search
/// engine uses the same checks to prune.
VehicleState step_vehicle(const VehicleState& state, const ControlInput& input,
                          const ModelParams& params);

/// Non-throwing variant; returns the violated constraint instead of the state.
bool try_step_vehicle(const VehicleState& state, const ControlInput& input,
                      const ModelParams& params, VehicleState* out,
                      StepConstraint* violated);

/// True iff `car` is in the ego's lane, at or ahead of it, the ego is moving,
/// and the time gap is within the ego's time-to-stop.
bool collision_next(const VehicleState& ego, const VehicleState& car,
                    const ModelParams& params);

/// Deterministic ego policy: full braking when collision_next holds for either
/// car, otherwise approach the cruise speed without overshooting; coast when
/// already at or above it. The ego never changes lane.
VehicleState ego_step(const WorldState& world, const ModelParams& params);

struct InvariantViolation {
  int first_vehicle;   // 0=ego, 1=car1, 2=car2
  int second_vehicle;
  Rat gap;
  std::string describe() const;

  bool operator==(const InvariantViolation&) const = default;
};

/// Pairwise no-crash invariant: every same-lane pair must keep a gap strictly
/// greater than safe_distance.
std::vector<InvariantViolation> check_invariants(const WorldState& world,
                                                 const ModelParams& params);

/// Canonical initial world: everyone at pos 0, speed 0, ego in the middle
/// lane, car1 directly to its left, car2 directly to its right.
WorldState initial_world(const ModelParams& params);

/// Advances the whole world one step: both non-egos by their inputs, the ego
/// by its policy evaluated on the current state.
WorldState advance_world(const WorldState& world, const ControlInput& car1_input,
                         const ControlInput& car2_input, const ModelParams& params);

}  // namespace scenforge
