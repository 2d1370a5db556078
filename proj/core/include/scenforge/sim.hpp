#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "scenforge/concretize.hpp"
#include "scenforge/model.hpp"

namespace scenforge {

struct SimConfig {
  double dt = 0.05;            // s
  double max_sim_time = 120;   // s
  double lane_width = 3.5;     // m
  double vehicle_length = 4.5; // m
  double vehicle_width = 2.0;  // m
  std::uint64_t rng_seed = 1;

  void validate() const;
};

/// The pluggable driving agent under test. OracleAcc sees ground truth;
/// FaultyPerceptionAcc sees a degraded world: each non-ego observation is
/// dropped independently per sample with dropout_prob, and detections lag by
/// detection_latency seconds.
struct EgoAgentSpec {
  enum class Kind { OracleAcc, FaultyPerceptionAcc };
  Kind kind = Kind::OracleAcc;
  double dropout_prob = 0;      // [0, 1]
  double detection_latency = 0; // s

  void validate() const;
  std::string to_string() const;
  /// Parses "oracle" or "faulty:<dropout>:<latency>".
  static EgoAgentSpec parse(std::string_view text);
};

struct VehicleSample {
  double x = 0;      // longitudinal, m
  double y = 0;      // lateral, m (lane centers at lane * lane_width)
  int lane = 0;      // nearest lane center
  double speed = 0;  // m/s
};

struct TraceSample {
  double t = 0;
  std::array<VehicleSample, 3> veh;  // 0 = ego, 1 = car1, 2 = car2
  double throttle = 0;               // ego telemetry
  double brake = 0;
};

struct CollisionEvent {
  enum class Kind { Frontal, Other };
  double t = 0;
  Kind kind = Kind::Other;
  std::array<int, 2> pair{};  // vehicle indices, smaller first

  bool operator==(const CollisionEvent&) const = default;
};

struct ConcreteTrace {
  std::vector<TraceSample> samples;
  std::vector<CollisionEvent> events;
};

class ScenarioUnrunnable : public std::runtime_error {
 public:
  explicit ScenarioUnrunnable(const std::string& msg) : std::runtime_error(msg) {}
};

/// Fixed-step kinematic simulation of one concrete scenario: the non-egos
/// execute their behavior programs, the ego runs `agent` with the physics
/// limits from `params`. Deterministic for a fixed seed.
ConcreteTrace run(const ConcreteScenario& scenario, const EgoAgentSpec& agent,
                  const SimConfig& cfg, const ModelParams& params);

struct ObservedCar {
  int id = 1;  // 1 or 2
  double x = 0;
  double y = 0;
  double speed = 0;
};

struct EgoObservation {
  std::vector<ObservedCar> cars;
};

/// Perception model behind the agent: buffers ground truth and applies the
/// agent's dropout/latency. Identical seeds yield identical drop sequences.
class Perception {
 public:
  Perception(const EgoAgentSpec& agent, const SimConfig& cfg);
  EgoObservation observe(const TraceSample& truth);

 private:
  EgoAgentSpec agent_;
  double dt_;
  int latency_ticks_ = 0;
  std::vector<TraceSample> history_;
  std::mt19937_64 rng_;
};

/// Axis-aligned rectangle overlaps in the (x, y) plane for one sample.
/// Frontal iff the pair involves the ego, the car is at or ahead of it, and
/// the car's nearest lane is the ego's at contact.
std::vector<CollisionEvent> detect_collisions(const TraceSample& sample, const SimConfig& cfg);

/// Recomputes collision events for an imported trace (overlap onset per pair).
std::vector<CollisionEvent> derive_events(const ConcreteTrace& trace, const SimConfig& cfg);

/// CSV with header t,veh,x,y,lane,speed,throttle,brake; one row per vehicle
/// per sample. Events travel in a JSON sidecar.
std::string trace_to_csv(const ConcreteTrace& trace);
ConcreteTrace trace_from_csv(std::string_view csv_text);
std::string events_to_json(const std::vector<CollisionEvent>& events);
std::vector<CollisionEvent> events_from_json(std::string_view text);

}  // namespace scenforge
