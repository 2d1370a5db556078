#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scenforge/monitor.hpp"
#include "scenforge/search.hpp"

namespace scenforge {

struct OffsetRow {
  double offset = 0;
  int total = 0;
  int coverage_ok = 0;
  int property_fail = 0;
  int cover_ok_and_prop_fail = 0;

  bool operator==(const OffsetRow&) const = default;
};

struct UnionRow {
  int total = 0;
  // Per-spec existential aggregation: a spec counts in a column when at least
  // one of its offset runs satisfies that column's condition.
  int coverage_ok = 0;
  int property_fail = 0;
  int cover_ok_and_prop_fail = 0;

  bool operator==(const UnionRow&) const = default;
};

struct CampaignReport {
  std::string tool_version;
  std::string params_hash;
  std::string agent;
  std::uint64_t seed = 0;
  int catalog_size = 0;

  // spec id -> "found" or "not_found:<reason>"
  std::map<std::string, std::string> abstract_generation;
  int abstract_found = 0;

  std::vector<OffsetRow> rows;  // ordered +3.5, 0, -3.5 like the report table
  UnionRow union_row;

  // spec id -> offset key ("3.5", "0.0", "-3.5") -> outcome name; specs with
  // no witness are absent.
  std::map<std::string, std::map<std::string, std::string>> per_spec;

  int concrete_covered = 0;  // specs with at least one compliant run

  bool operator==(const CampaignReport&) const = default;
};

struct CampaignOptions {
  int jobs = 1;
  // When set, per-run artifacts are written here: abstract traces, scenario
  // files, trace CSVs, event sidecars, verdicts.jsonl (and SVGs if asked).
  std::optional<std::filesystem::path> artifacts_dir;
  bool write_svg = false;
};

/// Runs the full pipeline for every spec in the catalog: witness search,
/// three offset concretizations, simulation, monitoring; aggregates per-offset
/// and set-union rows. Per-spec failures are recorded, never fatal.
CampaignReport run_campaign(const ScenarioCatalog& catalog, const ModelParams& params,
                            const EgoAgentSpec& agent, const SearchConfig& search_cfg,
                            const SimConfig& sim_cfg, const CampaignOptions& options = {});

std::string report_to_json(const CampaignReport& report);
CampaignReport report_from_json(std::string_view text);

/// Table-shaped CSV: one row per offset plus the set-union row.
std::string report_to_csv(const CampaignReport& report);

/// Per-run seed derivation; deterministic and independent of scheduling.
std::uint64_t run_seed(std::uint64_t campaign_seed, const std::string& scenario_id);

}  // namespace scenforge
