#include "scenforge/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace scenforge {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string run_to_svg(const ConcreteTrace& trace, const MonitorVerdict& verdict) {
  const double width = 900, height = 460, ml = 60, mr = 20, mt = 40, mb = 40;
  double t_max = 1, x_min = 0, x_max = 1;
  for (const TraceSample& s : trace.samples) {
    t_max = std::max(t_max, s.t);
    for (const VehicleSample& v : s.veh) {
      x_min = std::min(x_min, v.x);
      x_max = std::max(x_max, v.x);
    }
  }
  if (x_max <= x_min) x_max = x_min + 1;
  auto px = [&](double t) { return ml + (t / t_max) * (width - ml - mr); };
  auto py = [&](double x) {
    return height - mb - ((x - x_min) / (x_max - x_min)) * (height - mt - mb);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << " " << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<text x=\"" << num(ml) << "\" y=\"20\">" << verdict.scenario_id << " ("
     << outcome_name(verdict.outcome) << ")</text>\n";
  os << "<line x1=\"" << num(ml) << "\" y1=\"" << num(height - mb) << "\" x2=\""
     << num(width - mr) << "\" y2=\"" << num(height - mb)
     << "\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  os << "<line x1=\"" << num(ml) << "\" y1=\"" << num(mt) << "\" x2=\"" << num(ml)
     << "\" y2=\"" << num(height - mb) << "\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  os << "<text x=\"" << num(width - mr - 40) << "\" y=\"" << num(height - 10)
     << "\">t [s]</text>\n";
  os << "<text x=\"6\" y=\"" << num(mt + 10) << "\">x [m]</text>\n";

  const char* colors[3] = {"#1f6fd0", "#d0341f", "#e08a00"};
  const char* names[3] = {"ego", "car1", "car2"};
  for (int i = 0; i < 3; ++i) {
    os << "<polyline fill=\"none\" stroke=\"" << colors[i] << "\" stroke-width=\"1.5\" points=\"";
    for (const TraceSample& s : trace.samples) {
      os << num(px(s.t)) << "," << num(py(s.veh[static_cast<std::size_t>(i)].x)) << " ";
    }
    os << "\"/>\n";
    os << "<text x=\"" << num(width - mr - 50) << "\" y=\"" << num(mt + 16 + 16 * i)
       << "\" fill=\"" << colors[i] << "\">" << names[i] << "</text>\n";
  }

  if (verdict.phase_times) {
    for (int phase = 0; phase < 2; ++phase) {
      double t = phase == 0 ? verdict.phase_times->first : verdict.phase_times->second;
      os << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(mt) << "\" x2=\"" << num(px(t))
         << "\" y2=\"" << num(height - mb)
         << "\" stroke=\"#2a9d2a\" stroke-dasharray=\"4 3\"/>\n";
      os << "<text x=\"" << num(px(t) + 3) << "\" y=\"" << num(mt + 12) << "\" fill=\"#2a9d2a\">t_"
         << (phase == 0 ? "A" : "B") << "=" << num(t) << "</text>\n";
    }
  }

  for (const CollisionEvent& ev : trace.events) {
    // mark at the involved non-ego's position when available
    double x_mark = 0;
    for (const TraceSample& s : trace.samples) {
      if (s.t >= ev.t) {
        x_mark = s.veh[static_cast<std::size_t>(ev.pair[1])].x;
        break;
      }
    }
    const char* color = ev.kind == CollisionEvent::Kind::Frontal ? "#c00000" : "#888888";
    os << "<g class=\"collision-marker\"><circle cx=\"" << num(px(ev.t)) << "\" cy=\""
       << num(py(x_mark)) << "\" r=\"5\" fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>"
       << "<text x=\"" << num(px(ev.t) + 6) << "\" y=\"" << num(py(x_mark) - 6) << "\" fill=\""
       << color << "\">collision t=" << num(ev.t) << "</text></g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace scenforge
