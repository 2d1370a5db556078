#pragma once

#include <compare>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scenforge/grid.hpp"

namespace scenforge {

/// One scene constraint: which cell each non-ego must occupy (membership in
/// its satisfied-cell set). Cells are always in 1..8, never Outside.
struct GridConfig {
  GridCell car1_cell = GridCell::FrontLeft;
  GridCell car2_cell = GridCell::FrontLeft;

  auto operator<=>(const GridConfig&) const = default;
};

/// An abstract scenario: reach `first`, then strictly later reach `second`.
struct ScenarioSpec {
  std::string id;
  GridConfig first;
  GridConfig second;

  bool operator==(const ScenarioSpec&) const = default;
};

struct ScenarioCatalog {
  std::vector<ScenarioSpec> specs;

  bool operator==(const ScenarioCatalog&) const = default;
};

/// Deterministic identifier for a (first, second) pair, e.g. "s_22_64".
std::string spec_auto_id(const GridConfig& first, const GridConfig& second);

/// All 8^4 = 4096 (A1,A2,B1,B2) combinations in lexicographic order.
ScenarioCatalog enumerate_all();

/// The default coverage set: 144 scenarios built as a 12x12 cross of start
/// configurations (mirror-symmetric pairs plus same-cell pairs on the front
/// and side cells) and end configurations (one car in a rear cell, the other
/// in a side cell, both orders). The same set ships as a DSL file in data/.
ScenarioCatalog default_catalog();

/// The 12 start and 12 end configurations used by default_catalog().
const std::vector<GridConfig>& default_start_configs();
const std::vector<GridConfig>& default_end_configs();

enum class DslErrorKind { Syntax, DuplicateId, CellOutOfRange };

class DslError : public std::runtime_error {
 public:
  DslError(DslErrorKind kind, int line, int col, const std::string& msg);
  DslErrorKind kind() const { return kind_; }
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  DslErrorKind kind_;
  int line_;
  int col_;
};

/// Parses the scenario DSL:
///   scenario <id>: reach { car1@<n>, car2@<n> } then { car1@<n>, car2@<n> }
/// with '#' comments and free-form whitespace. n is in 1..8.
ScenarioCatalog parse_scenario_dsl(std::string_view text);

/// Canonical DSL rendering; parse_scenario_dsl(print_scenario_dsl(c)) == c.
std::string print_scenario_dsl(const ScenarioCatalog& catalog);

/// Canonical JSON export: array of {id, first:[n,n], second:[n,n]}.
std::string catalog_to_json(const ScenarioCatalog& catalog);
ScenarioCatalog catalog_from_json(std::string_view json_text);

/// Parses the inline form "a1,a2->b1,b2" (e.g. "2,2->6,4"); the id is derived
/// with spec_auto_id.
ScenarioSpec parse_inline_spec(std::string_view text);

/// Two-phase reachability objective induced by a scenario: phase 1 holds at a
/// state where both membership predicates of `first` are true, phase 2 the
/// same for `second` at a strictly later step.
struct ReachObjective {
  GridConfig first;
  GridConfig second;

  bool phase1_holds(const WorldState& w, const GridBounds& bounds) const;
  bool phase2_holds(const WorldState& w, const GridBounds& bounds) const;

  /// Earliest (i, j), i < j, with phase 1 at states[i] and phase 2 at
  /// states[j]; nullopt when the trace does not witness the objective.
  std::optional<std::pair<int, int>> satisfied_at(const std::vector<WorldState>& states,
                                                  const GridBounds& bounds) const;
};

ReachObjective spec_to_objective(const ScenarioSpec& spec);

/// True iff both cars' satisfied-cell sets contain their required cell.
bool config_holds(const GridConfig& cfg, const WorldState& w, const GridBounds& bounds);

}  // namespace scenforge
