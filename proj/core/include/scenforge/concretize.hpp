#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "scenforge/search.hpp"

namespace scenforge {

struct DriveNode {
  double target_speed = 0;  // m/s
  double distance = 0;      // m

  bool operator==(const DriveNode&) const = default;
};

struct LaneChangeNode {
  int direction = -1;                // -1 left, +1 right
  double speed = 0;                  // m/s
  double maneuver_distance = 9.0;    // m traveled while crossing lanes
  double total_distance = 12.0;      // m traveled before the node terminates

  bool operator==(const LaneChangeNode&) const = default;
};

struct StandStillNode {
  double duration = 0;  // s

  bool operator==(const StandStillNode&) const = default;
};

using BehaviorNode = std::variant<DriveNode, LaneChangeNode, StandStillNode>;

struct BehaviorProgram {
  int vehicle_id = 1;  // 1 or 2
  int initial_lane = 0;
  double initial_offset = 0;  // m, absolute spawn position
  std::vector<BehaviorNode> nodes;

  bool operator==(const BehaviorProgram&) const = default;
};

struct ConcreteScenario {
  std::string scenario_id;
  std::string spec_id;
  double offset_variant = 0;  // m
  std::array<BehaviorProgram, 2> programs;
  int ego_lane = 1;
  double ego_pos = 0;
  double ego_route_length = 0;

  bool operator==(const ConcreteScenario&) const = default;
};

struct ConcretizeOptions {
  // Merge consecutive equal-target-speed drive nodes; off by default so the
  // program mirrors the abstract trace segment by segment.
  bool merge_drives = false;
  // Wall-clock seconds per abstract state, from ModelParams::time_step.
  double step_seconds = 1.0;
};

class InvalidTrace : public std::runtime_error {
 public:
  explicit InvalidTrace(const std::string& msg) : std::runtime_error(msg) {}
};

/// Initial-position variants for the non-egos: behind, level, ahead.
std::vector<double> offsets();

/// Refines a validated abstract trace into one concrete scenario. Per
/// transition and per non-ego: a same-lane moving step becomes a drive node
/// (target = next abstract speed, distance = abstract position delta), a lane
/// change becomes a 9 m-maneuver / 12 m-total lane-change node at the next
/// abstract speed, and every maximal run of standing-still states becomes one
/// stand-still node of that many seconds.
ConcreteScenario concretize(const AbstractTrace& trace, double offset,
                            const ConcretizeOptions& options = {});

/// Canonical scenario JSON; byte-stable, two-decimal fixed formatting.
std::string scenario_to_json(const ConcreteScenario& scenario);
ConcreteScenario scenario_from_json(std::string_view text);

/// Generated code for an external scenario runner: one sequential behavior
/// composite per non-ego, drive / lane-change / stand-still atoms guarded by
/// distance and timeout triggers. Not executed by this toolchain.
std::string export_scenariorunner_script(const ConcreteScenario& scenario);

}  // namespace scenforge
