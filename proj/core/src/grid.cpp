#include "scenforge/grid.hpp"

#include <stdexcept>

namespace scenforge {

GridCell cell_from_number(int n) {
  if (n < 1 || n > 8) throw std::out_of_range("grid cell number must be in 1..8");
  return static_cast<GridCell>(n);
}

const char* cell_name(GridCell c) {
  switch (c) {
    case GridCell::Outside: return "outside";
    case GridCell::FrontLeft: return "front-left";
    case GridCell::FrontCenter: return "front-center";
    case GridCell::FrontRight: return "front-right";
    case GridCell::Left: return "left";
    case GridCell::Right: return "right";
    case GridCell::RearLeft: return "rear-left";
    case GridCell::RearCenter: return "rear-center";
    case GridCell::RearRight: return "rear-right";
  }
  return "?";
}

std::vector<GridCell> CellSet::cells() const {
  std::vector<GridCell> out;
  for (int n = 1; n <= 8; ++n) {
    if (mask_ & (1u << n)) out.push_back(static_cast<GridCell>(n));
  }
  return out;
}

GridBounds GridBounds::evaluation() { return GridBounds{Rat(4), Rat(24), Rat(10)}; }

GridBounds GridBounds::generation() { return GridBounds{Rat(7), Rat(21), Rat(7)}; }

void GridBounds::validate() const {
  if (near_min < Rat(0) || !(near_min < far_max)) {
    throw std::invalid_argument("grid bounds: need 0 <= near_min < far_max");
  }
  if (!(adjacent_max > Rat(0))) {
    throw std::invalid_argument("grid bounds: adjacent_max must be > 0");
  }
}

CellSet grid_cells(const VehicleState& ego, const VehicleState& car,
                   const GridBounds& bounds) {
  return CellSet::from_mask(detail::cell_mask<Rat>(ego.lane, ego.pos, car.lane, car.pos,
                                                   bounds.near_min, bounds.far_max,
                                                   bounds.adjacent_max));
}

CellSet grid_cells(int ego_lane, double ego_pos, int car_lane, double car_pos,
                   const GridBounds& bounds) {
  return CellSet::from_mask(detail::cell_mask<double>(
      ego_lane, ego_pos, car_lane, car_pos, rat_to_double(bounds.near_min),
      rat_to_double(bounds.far_max), rat_to_double(bounds.adjacent_max)));
}

}  // namespace scenforge
