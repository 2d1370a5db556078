#include "scenforge/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "scenforge/svg.hpp"

namespace scenforge {

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string offset_key(double offset) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.1f", offset);
  return buf;
}

struct RunResult {
  std::string scenario_id;
  double offset = 0;
  MonitorVerdict verdict;
};

struct SpecResult {
  std::string spec_id;
  std::string generation;  // "found" or "not_found:<reason>"
  std::vector<RunResult> runs;
  std::string trace_jsonl;                 // artifacts, optional
  std::vector<std::string> scenario_json;  // one per offset
  std::vector<std::string> trace_csv;
  std::vector<std::string> events_json;
  std::vector<std::string> svg;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

}  // namespace

std::uint64_t run_seed(std::uint64_t campaign_seed, const std::string& scenario_id) {
  std::uint64_t h = campaign_seed ^ 0x9e3779b97f4a7c15ULL;
  for (char c : scenario_id) h = hash_mix(h, static_cast<unsigned char>(c));
  return h;
}

CampaignReport run_campaign(const ScenarioCatalog& catalog, const ModelParams& params,
                            const EgoAgentSpec& agent, const SearchConfig& search_cfg,
                            const SimConfig& sim_cfg, const CampaignOptions& options) {
  params.validate();
  agent.validate();
  sim_cfg.validate();
  search_cfg.validate(params);

  const bool keep_artifacts = options.artifacts_dir.has_value();
  const std::vector<double> offs = offsets();
  std::vector<SpecResult> results(catalog.specs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= catalog.specs.size()) return;
      const ScenarioSpec& spec = catalog.specs[i];
      SpecResult& res = results[i];
      res.spec_id = spec.id;
      SearchResult sr = find_witness(spec, params, search_cfg);
      if (const NotFound* nf = std::get_if<NotFound>(&sr)) {
        res.generation = std::string("not_found:") + not_found_reason_name(nf->reason);
        continue;
      }
      const AbstractTrace& trace = std::get<AbstractTrace>(sr);
      res.generation = "found";
      if (keep_artifacts) res.trace_jsonl = trace_to_jsonl(trace);
      ConcretizeOptions copt;
      copt.step_seconds = rat_to_double(params.time_step);
      for (double off : offs) {
        ConcreteScenario scenario = concretize(trace, off, copt);
        // Round-trip through the canonical serialization so in-process runs
        // match the file pipeline bit for bit.
        scenario = scenario_from_json(scenario_to_json(scenario));
        SimConfig run_cfg = sim_cfg;
        run_cfg.rng_seed = run_seed(sim_cfg.rng_seed, scenario.scenario_id);
        ConcreteTrace concrete = run(scenario, agent, run_cfg, params);
        MonitorVerdict verdict =
            monitor_run(concrete, spec, scenario.scenario_id, off, GridBounds::evaluation());
        res.runs.push_back({scenario.scenario_id, off, verdict});
        if (keep_artifacts) {
          res.scenario_json.push_back(scenario_to_json(scenario));
          res.trace_csv.push_back(trace_to_csv(concrete));
          res.events_json.push_back(events_to_json(concrete.events));
          if (options.write_svg) res.svg.push_back(run_to_svg(concrete, verdict));
        }
      }
    }
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  CampaignReport report;
  report.tool_version = kToolVersion;
  report.params_hash = params.hash();
  report.agent = agent.to_string();
  report.seed = sim_cfg.rng_seed;
  report.catalog_size = static_cast<int>(catalog.specs.size());

  for (double off : offs) {
    OffsetRow row;
    row.offset = off;
    row.total = report.catalog_size;
    report.rows.push_back(row);
  }
  // Present rows in table order: ahead, level, behind.
  std::sort(report.rows.begin(), report.rows.end(),
            [](const OffsetRow& a, const OffsetRow& b) { return a.offset > b.offset; });
  report.union_row.total = report.catalog_size;

  for (const SpecResult& res : results) {
    report.abstract_generation[res.spec_id] = res.generation;
    if (res.generation == "found") ++report.abstract_found;
    bool any_cover = false, any_fail = false, any_both = false;
    for (const RunResult& rr : res.runs) {
      const bool cover = rr.verdict.compliance;
      const bool fail = !rr.verdict.property_ok;
      for (OffsetRow& row : report.rows) {
        if (row.offset == rr.offset) {
          row.coverage_ok += cover ? 1 : 0;
          row.property_fail += fail ? 1 : 0;
          row.cover_ok_and_prop_fail += (cover && fail) ? 1 : 0;
        }
      }
      any_cover |= cover;
      any_fail |= fail;
      any_both |= cover && fail;
      report.per_spec[res.spec_id][offset_key(rr.offset)] = outcome_name(rr.verdict.outcome);
    }
    report.union_row.coverage_ok += any_cover ? 1 : 0;
    report.union_row.property_fail += any_fail ? 1 : 0;
    report.union_row.cover_ok_and_prop_fail += any_both ? 1 : 0;
    if (any_cover) ++report.concrete_covered;
  }

  if (keep_artifacts) {
    namespace fs = std::filesystem;
    const fs::path root = *options.artifacts_dir;
    fs::create_directories(root / "abstract");
    fs::create_directories(root / "scenarios");
    fs::create_directories(root / "traces");
    if (options.write_svg) fs::create_directories(root / "svg");
    std::string verdicts;
    for (const SpecResult& res : results) {
      if (!res.trace_jsonl.empty()) {
        write_file(root / "abstract" / (res.spec_id + ".trace.jsonl"), res.trace_jsonl);
      }
      for (std::size_t k = 0; k < res.runs.size(); ++k) {
        const std::string& sid = res.runs[k].scenario_id;
        write_file(root / "scenarios" / (sid + ".json"), res.scenario_json[k]);
        write_file(root / "traces" / (sid + ".csv"), res.trace_csv[k]);
        write_file(root / "traces" / (sid + ".events.json"), res.events_json[k]);
        if (options.write_svg) write_file(root / "svg" / (sid + ".svg"), res.svg[k]);
        verdicts += verdict_to_json(res.runs[k].verdict);
      }
    }
    write_file(root / "verdicts.jsonl", verdicts);
  }
  return report;
}

std::string report_to_json(const CampaignReport& r) {
  nlohmann::ordered_json o;
  o["schema"] = "scenforge.report.v1";
  nlohmann::ordered_json meta;
  meta["tool_version"] = r.tool_version;
  meta["params_hash"] = r.params_hash;
  meta["agent"] = r.agent;
  meta["seed"] = r.seed;
  meta["catalog_size"] = r.catalog_size;
  o["metadata"] = std::move(meta);
  nlohmann::ordered_json gen = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.abstract_generation) gen[k] = v;
  o["abstract_generation"] = std::move(gen);
  o["abstract_coverage"] = {{"found", r.abstract_found}, {"total", r.catalog_size}};
  o["concrete_coverage"] = {{"covered", r.concrete_covered}, {"total", r.catalog_size}};
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const OffsetRow& row : r.rows) {
    nlohmann::ordered_json jr;
    jr["offset"] = row.offset;
    jr["total"] = row.total;
    jr["coverage_ok"] = row.coverage_ok;
    jr["property_fail"] = row.property_fail;
    jr["cover_ok_and_prop_fail"] = row.cover_ok_and_prop_fail;
    rows.push_back(std::move(jr));
  }
  o["offset_rows"] = std::move(rows);
  o["union_row"] = {{"total", r.union_row.total},
                    {"coverage_ok", r.union_row.coverage_ok},
                    {"property_fail", r.union_row.property_fail},
                    {"cover_ok_and_prop_fail", r.union_row.cover_ok_and_prop_fail}};
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& [sid, by_off] : r.per_spec) {
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& [off, outcome] : by_off) m[off] = outcome;
    per[sid] = std::move(m);
  }
  o["per_spec"] = std::move(per);
  return o.dump(2) + "\n";
}

CampaignReport report_from_json(std::string_view text) {
  nlohmann::json o = nlohmann::json::parse(text);
  CampaignReport r;
  r.tool_version = o.at("metadata").at("tool_version").get<std::string>();
  r.params_hash = o.at("metadata").at("params_hash").get<std::string>();
  r.agent = o.at("metadata").at("agent").get<std::string>();
  r.seed = o.at("metadata").at("seed").get<std::uint64_t>();
  r.catalog_size = o.at("metadata").at("catalog_size").get<int>();
  for (const auto& [k, v] : o.at("abstract_generation").items()) {
    r.abstract_generation[k] = v.get<std::string>();
  }
  r.abstract_found = o.at("abstract_coverage").at("found").get<int>();
  r.concrete_covered = o.at("concrete_coverage").at("covered").get<int>();
  for (const auto& jr : o.at("offset_rows")) {
    OffsetRow row;
    row.offset = jr.at("offset").get<double>();
    row.total = jr.at("total").get<int>();
    row.coverage_ok = jr.at("coverage_ok").get<int>();
    row.property_fail = jr.at("property_fail").get<int>();
    row.cover_ok_and_prop_fail = jr.at("cover_ok_and_prop_fail").get<int>();
    r.rows.push_back(row);
  }
  r.union_row.total = o.at("union_row").at("total").get<int>();
  r.union_row.coverage_ok = o.at("union_row").at("coverage_ok").get<int>();
  r.union_row.property_fail = o.at("union_row").at("property_fail").get<int>();
  r.union_row.cover_ok_and_prop_fail = o.at("union_row").at("cover_ok_and_prop_fail").get<int>();
  for (const auto& [sid, m] : o.at("per_spec").items()) {
    for (const auto& [off, outcome] : m.items()) {
      r.per_spec[sid][off] = outcome.get<std::string>();
    }
  }
  return r;
}

std::string report_to_csv(const CampaignReport& r) {
  std::string out = "offset,total,coverage_ok,property_fail,cover_ok_and_prop_fail\n";
  char buf[128];
  for (const OffsetRow& row : r.rows) {
    std::snprintf(buf, sizeof(buf), "%.1f,%d,%d,%d,%d\n", row.offset, row.total,
                  row.coverage_ok, row.property_fail, row.cover_ok_and_prop_fail);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "union,%d,%d,%d,%d\n", r.union_row.total,
                r.union_row.coverage_ok, r.union_row.property_fail,
                r.union_row.cover_ok_and_prop_fail);
  out += buf;
  return out;
}

}  // namespace scenforge
