#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scenforge/catalog.hpp"
#include "scenforge/sim.hpp"

namespace scenforge {

enum class Outcome {
  CoverOkPropOk,
  CoverOkPropFail,
  CoverFailPropOk,
  CoverFailPropFail,
};

const char* outcome_name(Outcome o);
Outcome outcome_from_name(std::string_view name);

/// Total bijection from (compliance, property_ok) to the four outcomes.
Outcome classify(bool compliance, bool property_ok);

struct ObservationFrame {
  double t = 0;
  CellSet car1;
  CellSet car2;
};

/// Maps each trace sample back to the abstract grid with the evaluation
/// bounds; lane attribution comes from the recorded nearest-lane column.
std::vector<ObservationFrame> abstract_observation(const ConcreteTrace& trace,
                                                   const GridBounds& bounds);

struct ComplianceResult {
  bool ok = false;
  std::optional<std::pair<double, double>> phase_times;  // earliest (t_A, t_B), t_A < t_B
};

/// True iff the first configuration holds at some sample and the second at a
/// strictly later one (membership semantics over the satisfied-cell sets).
ComplianceResult check_compliance(std::span<const ObservationFrame> obs,
                                  const ScenarioSpec& spec);

/// True iff the trace contains no frontal collision; collisions among
/// non-egos or rear-endings of the ego do not count.
bool check_property(const ConcreteTrace& trace);

struct MonitorVerdict {
  std::string scenario_id;
  std::string spec_id;
  double offset = 0;
  bool compliance = false;
  bool property_ok = true;
  Outcome outcome = Outcome::CoverFailPropOk;
  std::optional<double> first_violation_t;
  std::optional<std::pair<double, double>> phase_times;

  bool operator==(const MonitorVerdict&) const = default;
};

/// Full verdict for one run.
MonitorVerdict monitor_run(const ConcreteTrace& trace, const ScenarioSpec& spec,
                           const std::string& scenario_id, double offset,
                           const GridBounds& bounds = GridBounds::evaluation());

/// One JSON object per verdict, newline-terminated.
std::string verdict_to_json(const MonitorVerdict& v);
MonitorVerdict verdict_from_json(std::string_view text);

}  // namespace scenforge
