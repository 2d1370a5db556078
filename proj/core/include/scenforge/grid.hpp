#pragma once

#include <cstdint>
#include <vector>

#include "scenforge/model.hpp"
#include "scenforge/rational.hpp"

namespace scenforge {

// 3x3 grid centered on the ego; the ego occupies the middle. Cells are
// numbered 1..8: 1 front-left, 2 front-center, 3 front-right, 4 left,
// 5 right, 6 rear-left, 7 rear-center, 8 rear-right.
enum class GridCell : std::uint8_t {
  Outside = 0,
  FrontLeft = 1,
  FrontCenter = 2,
  FrontRight = 3,
  Left = 4,
  Right = 5,
  RearLeft = 6,
  RearCenter = 7,
  RearRight = 8,
};

inline int cell_number(GridCell c) { return static_cast<int>(c); }

/// Maps 1..8 to a cell; throws std::out_of_range otherwise.
GridCell cell_from_number(int n);

const char* cell_name(GridCell c);

/// Set of simultaneously-satisfied cells. The cell predicates overlap by
/// construction (a car in the left lane 10 m ahead is both front-left and
/// left), so membership is the primitive operation. An empty set reads as the
/// singleton {Outside}.
class CellSet {
 public:
  CellSet() = default;
  static CellSet from_mask(std::uint16_t mask) {
    CellSet s;
    s.mask_ = mask;
    return s;
  }
  static CellSet outside() { return CellSet(); }

  void add(GridCell c) {
    if (c != GridCell::Outside) mask_ |= static_cast<std::uint16_t>(1u << cell_number(c));
  }
  bool contains(GridCell c) const {
    if (c == GridCell::Outside) return mask_ == 0;
    return (mask_ & (1u << cell_number(c))) != 0;
  }
  bool is_outside() const { return mask_ == 0; }
  int count() const { return __builtin_popcount(mask_); }
  std::uint16_t mask() const { return mask_; }
  std::vector<GridCell> cells() const;

  bool operator==(const CellSet&) const = default;

 private:
  std::uint16_t mask_ = 0;
};

/// Longitudinal cell boundaries relative to the ego. Front cells cover
/// [near_min, far_max] ahead, rear cells the mirror band behind, side cells
/// |delta| <= adjacent_max. Bounds are inclusive.
struct GridBounds {
  Rat near_min;
  Rat far_max;
  Rat adjacent_max;

  /// Bounds used when evaluating concrete traces: (4, 24, 10).
  static GridBounds evaluation();
  /// Shrunken bounds used for abstract generation, 3 m tighter on every side:
  /// (7, 21, 7). Cells generated under these bounds stay inside the
  /// evaluation cells, which makes concrete compliance robust.
  static GridBounds generation();

  void validate() const;

  bool operator==(const GridBounds&) const = default;
};

namespace detail {

// Shared predicate kernel; instantiated with Rat for the abstract model,
// double for concrete traces and scaled int64 inside the search engine.
template <class T>
std::uint16_t cell_mask(int ego_lane, const T& ego_pos, int car_lane, const T& car_pos,
                        const T& near_min, const T& far_max, const T& adjacent_max) {
  const T delta = car_pos - ego_pos;
  const T zero = T(0);
  const T abs_delta = delta < zero ? T(zero - delta) : delta;

  const bool front = delta > zero && abs_delta >= near_min && abs_delta <= far_max;
  const bool rear = delta < zero && abs_delta >= near_min && abs_delta <= far_max;
  const bool side = abs_delta <= adjacent_max;

  std::uint16_t mask = 0;
  auto set = [&mask](GridCell c) { mask |= static_cast<std::uint16_t>(1u << cell_number(c)); };
  if (car_lane < ego_lane) {
    if (front) set(GridCell::FrontLeft);
    if (side) set(GridCell::Left);
    if (rear) set(GridCell::RearLeft);
  } else if (car_lane == ego_lane) {
    if (front) set(GridCell::FrontCenter);
    if (rear) set(GridCell::RearCenter);
  } else {
    if (front) set(GridCell::FrontRight);
    if (side) set(GridCell::Right);
    if (rear) set(GridCell::RearRight);
  }
  return mask;
}

}  // namespace detail

/// Every cell whose predicate holds for `car` relative to `ego`; {Outside}
/// when none does.
CellSet grid_cells(const VehicleState& ego, const VehicleState& car,
                   const GridBounds& bounds);

/// Double-precision variant for concrete trace samples.
CellSet grid_cells(int ego_lane, double ego_pos, int car_lane, double car_pos,
                   const GridBounds& bounds);

}  // namespace scenforge
