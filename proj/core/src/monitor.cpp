#include "scenforge/monitor.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

namespace scenforge {

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::CoverOkPropOk: return "cover_ok_prop_ok";
    case Outcome::CoverOkPropFail: return "cover_ok_prop_fail";
    case Outcome::CoverFailPropOk: return "cover_fail_prop_ok";
    case Outcome::CoverFailPropFail: return "cover_fail_prop_fail";
  }
  return "?";
}

Outcome outcome_from_name(std::string_view name) {
  if (name == "cover_ok_prop_ok") return Outcome::CoverOkPropOk;
  if (name == "cover_ok_prop_fail") return Outcome::CoverOkPropFail;
  if (name == "cover_fail_prop_ok") return Outcome::CoverFailPropOk;
  if (name == "cover_fail_prop_fail") return Outcome::CoverFailPropFail;
  throw std::invalid_argument("unknown outcome '" + std::string(name) + "'");
}

Outcome classify(bool compliance, bool property_ok) {
  if (compliance) return property_ok ? Outcome::CoverOkPropOk : Outcome::CoverOkPropFail;
  return property_ok ? Outcome::CoverFailPropOk : Outcome::CoverFailPropFail;
}

std::vector<ObservationFrame> abstract_observation(const ConcreteTrace& trace,
                                                   const GridBounds& bounds) {
  std::vector<ObservationFrame> out;
  out.reserve(trace.samples.size());
  for (const TraceSample& s : trace.samples) {
    const VehicleSample& ego = s.veh[0];
    ObservationFrame f;
    f.t = s.t;
    f.car1 = grid_cells(ego.lane, ego.x, s.veh[1].lane, s.veh[1].x, bounds);
    f.car2 = grid_cells(ego.lane, ego.x, s.veh[2].lane, s.veh[2].x, bounds);
    out.push_back(f);
  }
  return out;
}

ComplianceResult check_compliance(std::span<const ObservationFrame> obs,
                                  const ScenarioSpec& spec) {
  auto holds = [&](const ObservationFrame& f, const GridConfig& cfg) {
    return f.car1.contains(cfg.car1_cell) && f.car2.contains(cfg.car2_cell);
  };
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!holds(obs[i], spec.first)) continue;
    for (std::size_t j = i + 1; j < obs.size(); ++j) {
      if (holds(obs[j], spec.second)) {
        return ComplianceResult{true, std::make_pair(obs[i].t, obs[j].t)};
      }
    }
    return ComplianceResult{false, std::nullopt};
  }
  return ComplianceResult{false, std::nullopt};
}

bool check_property(const ConcreteTrace& trace) {
  for (const CollisionEvent& ev : trace.events) {
    if (ev.kind == CollisionEvent::Kind::Frontal) return false;
  }
  return true;
}

MonitorVerdict monitor_run(const ConcreteTrace& trace, const ScenarioSpec& spec,
                           const std::string& scenario_id, double offset,
                           const GridBounds& bounds) {
  MonitorVerdict v;
  v.scenario_id = scenario_id;
  v.spec_id = spec.id;
  v.offset = offset;
  auto obs = abstract_observation(trace, bounds);
  ComplianceResult c = check_compliance(obs, spec);
  v.compliance = c.ok;
  v.phase_times = c.phase_times;
  v.property_ok = check_property(trace);
  if (!v.property_ok) {
    for (const CollisionEvent& ev : trace.events) {
      if (ev.kind == CollisionEvent::Kind::Frontal) {
        v.first_violation_t = ev.t;
        break;
      }
    }
  }
  v.outcome = classify(v.compliance, v.property_ok);
  return v;
}

namespace {

double round2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return std::stod(buf);
}

}  // namespace

std::string verdict_to_json(const MonitorVerdict& v) {
  nlohmann::ordered_json o;
  o["scenario_id"] = v.scenario_id;
  o["spec_id"] = v.spec_id;
  o["offset"] = v.offset;
  o["compliance"] = v.compliance;
  o["property_ok"] = v.property_ok;
  o["outcome"] = outcome_name(v.outcome);
  if (v.first_violation_t) {
    o["first_violation_t"] = round2(*v.first_violation_t);
  } else {
    o["first_violation_t"] = nullptr;
  }
  if (v.phase_times) {
    o["phase_times"] = {round2(v.phase_times->first), round2(v.phase_times->second)};
  } else {
    o["phase_times"] = nullptr;
  }
  return o.dump() + "\n";
}

MonitorVerdict verdict_from_json(std::string_view text) {
  nlohmann::json o = nlohmann::json::parse(text);
  MonitorVerdict v;
  v.scenario_id = o.at("scenario_id").get<std::string>();
  v.spec_id = o.at("spec_id").get<std::string>();
  v.offset = o.at("offset").get<double>();
  v.compliance = o.at("compliance").get<bool>();
  v.property_ok = o.at("property_ok").get<bool>();
  v.outcome = outcome_from_name(o.at("outcome").get<std::string>());
  if (!o.at("first_violation_t").is_null()) {
    v.first_violation_t = o.at("first_violation_t").get<double>();
  }
  if (!o.at("phase_times").is_null()) {
    v.phase_times = std::make_pair(o.at("phase_times").at(0).get<double>(),
                                   o.at("phase_times").at(1).get<double>());
  }
  return v;
}

}  // namespace scenforge
