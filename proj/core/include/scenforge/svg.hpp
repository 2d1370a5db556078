#pragma once

#include <string>

#include "scenforge/monitor.hpp"

namespace scenforge {

/// Position-vs-time diagram of one run: one polyline per vehicle, markers at
/// collision events, vertical rules at the compliance phase times.
std::string run_to_svg(const ConcreteTrace& trace, const MonitorVerdict& verdict);

}  // namespace scenforge
