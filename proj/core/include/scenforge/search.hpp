#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "scenforge/catalog.hpp"
#include "scenforge/model.hpp"

namespace scenforge {

struct SearchConfig {
  int max_steps = 30;
  // Discretization of the model's free acceleration input. Empty means
  // default_accel_menu(params).
  std::vector<Rat> accel_menu;
  bool allow_lane_actions = true;
  std::uint64_t node_budget = 1'000'000;  // expansions before giving up
  std::uint64_t rng_seed = 1;             // tie-breaking of equal-score nodes

  void validate(const ModelParams& params) const;
};

/// {max_braking, -2, 0, +2, max_acceleration}; the extremes dominate
/// reachability, the mild entries keep lane changes available.
std::vector<Rat> default_accel_menu(const ModelParams& params);

/// A finite witness of a scenario: states 0..L related by the transition
/// system, with the per-step non-ego inputs and the two phase indices.
struct AbstractTrace {
  std::string spec_id;
  std::string params_hash;
  GridConfig spec_first;   // carried so trace files are self-contained
  GridConfig spec_second;
  std::vector<WorldState> states;                                // length L+1
  std::vector<std::pair<ControlInput, ControlInput>> inputs;     // length L
  int phase1_index = -1;
  int phase2_index = -1;

  bool operator==(const AbstractTrace&) const = default;

  ScenarioSpec spec() const { return ScenarioSpec{spec_id, spec_first, spec_second}; }
};

struct NotFound {
  enum class Reason { Budget, Depth, InfeasibleAtInit };
  Reason reason = Reason::Depth;
  std::uint64_t nodes_expanded = 0;
};

const char* not_found_reason_name(NotFound::Reason r);

using SearchResult = std::variant<AbstractTrace, NotFound>;

/// Bounded best-first search for a trace witnessing `spec` under the shrunken
/// generation grid bounds. All cars start at pos 0, speed 0; ego in the middle
/// lane, car1 left of it, car2 right of it. Deterministic for fixed
/// (spec, params, cfg).
SearchResult find_witness(const ScenarioSpec& spec, const ModelParams& params,
                          const SearchConfig& cfg);

struct ValidationResult {
  bool ok = true;
  std::string diagnostic;  // first violated constraint when !ok
};

/// Independent checker, decoupled from the search engine: replays the trace
/// with plain rational arithmetic and verifies every transition relation, the
/// pairwise invariants, lane-change spacing, and the phase predicates.
ValidationResult validate_trace(const AbstractTrace& trace, const ScenarioSpec& spec,
                                const ModelParams& params);

class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(const std::string& msg) : std::runtime_error(msg) {}
};

using ReachPair = std::pair<GridConfig, GridConfig>;

/// Complete breadth-first enumeration (with state deduplication) of every
/// A-then-B configuration pair witnessed within `depth` steps. Test oracle for
/// find_witness; requires depth <= 8 and an accel menu of at most 3 entries.
std::set<ReachPair> exhaustive_reach(const ModelParams& params, const SearchConfig& cfg,
                                     int depth);

/// JSON-lines serialization: a header object, one state object per line,
/// then one input object per transition. Rationals are "p/q" strings.
std::string trace_to_jsonl(const AbstractTrace& trace);
AbstractTrace trace_from_jsonl(std::string_view text);

}  // namespace scenforge
