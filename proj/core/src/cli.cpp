#include "scenforge/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "scenforge/config.hpp"
#include "scenforge/svg.hpp"

namespace scenforge {

namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

fs::path default_out_dir() {
  if (const char* env = std::getenv("SCENFORGE_OUT_DIR")) return fs::path(env);
  return fs::path("out");
}

ScenarioCatalog load_catalog(const std::string& ref) {
  if (ref == "default") return default_catalog();
  if (ref == "all") return enumerate_all();
  return parse_scenario_dsl(read_file(ref));
}

struct CliState {
  ToolConfig cfg;
  std::string config_path;
  std::string out_dir_flag;

  void finish() {
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    if (!out_dir_flag.empty()) cfg.out_dir = out_dir_flag;
    if (cfg.out_dir.empty()) cfg.out_dir = default_out_dir();
  }
};

void add_common(CLI::App* cmd, CliState& st) {
  cmd->add_option("--config", st.config_path, "Key-value config file");
  cmd->add_option("--out", st.out_dir_flag,
                  "Output directory (default: $SCENFORGE_OUT_DIR or ./out)");
  cmd->add_option("--seed", st.cfg.seed, "Seed for search tie-breaking and simulation");
}

int cmd_generate(CliState& st, const std::string& inline_spec, const std::string& catalog_ref) {
  st.finish();
  // flag overrides run after config load, so reapply seed
  finalize_config(st.cfg);
  ScenarioCatalog catalog;
  if (!inline_spec.empty()) {
    catalog.specs.push_back(parse_inline_spec(inline_spec));
  } else {
    catalog = load_catalog(catalog_ref.empty() ? st.cfg.catalog : catalog_ref);
  }
  const fs::path dir = st.cfg.out_dir / "abstract";
  fs::create_directories(dir);
  int found = 0;
  std::string summary;
  for (const ScenarioSpec& spec : catalog.specs) {
    SearchResult r = find_witness(spec, st.cfg.model, st.cfg.search);
    if (const AbstractTrace* t = std::get_if<AbstractTrace>(&r)) {
      write_file(dir / (spec.id + ".trace.jsonl"), trace_to_jsonl(*t));
      summary += spec.id + ": found (" + std::to_string(t->states.size() - 1) + " steps)\n";
      ++found;
    } else {
      const NotFound& nf = std::get<NotFound>(r);
      summary += spec.id + ": not found (" + not_found_reason_name(nf.reason) + ")\n";
    }
  }
  std::cout << summary << found << "/" << catalog.specs.size() << " witnesses in "
            << dir.string() << "\n";
  if (!inline_spec.empty() && found == 0) {
    throw std::runtime_error("no witness for spec " + catalog.specs.front().id);
  }
  return 0;
}

int cmd_concretize(CliState& st, const std::string& trace_path, bool scripts) {
  st.finish();
  finalize_config(st.cfg);
  AbstractTrace trace = trace_from_jsonl(read_file(trace_path));
  ValidationResult vr = validate_trace(trace, trace.spec(), st.cfg.model);
  if (!vr.ok) throw std::runtime_error("trace invalid: " + vr.diagnostic);
  ConcretizeOptions opt;
  opt.merge_drives = st.cfg.merge_drives;
  opt.step_seconds = rat_to_double(st.cfg.model.time_step);
  const fs::path dir = st.cfg.out_dir / "scenarios";
  fs::create_directories(dir);
  for (double off : offsets()) {
    ConcreteScenario s = concretize(trace, off, opt);
    write_file(dir / (s.scenario_id + ".json"), scenario_to_json(s));
    if (scripts) {
      write_file(dir / (s.scenario_id + ".py"), export_scenariorunner_script(s));
    }
    std::cout << dir.string() << "/" << s.scenario_id << ".json\n";
  }
  return 0;
}

int cmd_simulate(CliState& st, const std::string& scenario_path, const std::string& agent_str) {
  st.finish();
  if (!agent_str.empty()) st.cfg.agent = EgoAgentSpec::parse(agent_str);
  finalize_config(st.cfg);
  ConcreteScenario scenario = scenario_from_json(read_file(scenario_path));
  SimConfig run_cfg = st.cfg.sim;
  run_cfg.rng_seed = run_seed(st.cfg.sim.rng_seed, scenario.scenario_id);
  ConcreteTrace trace = run(scenario, st.cfg.agent, run_cfg, st.cfg.model);
  const fs::path dir = st.cfg.out_dir / "traces";
  fs::create_directories(dir);
  const fs::path csv = dir / (scenario.scenario_id + ".csv");
  write_file(csv, trace_to_csv(trace));
  write_file(dir / (scenario.scenario_id + ".events.json"), events_to_json(trace.events));
  std::cout << csv.string() << " (" << trace.samples.size() << " samples, "
            << trace.events.size() << " collision events)\n";
  return 0;
}

int cmd_monitor(CliState& st, const std::string& trace_path, const std::string& events_path,
                const std::string& spec_str, double offset, std::string scenario_id,
                const std::string& verdict_out) {
  st.finish();
  finalize_config(st.cfg);
  ConcreteTrace trace = trace_from_csv(read_file(trace_path));
  if (!events_path.empty()) {
    trace.events = events_from_json(read_file(events_path));
  } else {
    fs::path sidecar = trace_path;
    sidecar.replace_extension("");
    sidecar += ".events.json";
    if (fs::exists(sidecar)) {
      trace.events = events_from_json(read_file(sidecar));
    } else {
      trace.events = derive_events(trace, st.cfg.sim);
    }
  }
  ScenarioSpec spec = parse_inline_spec(spec_str);
  if (scenario_id.empty()) scenario_id = fs::path(trace_path).stem().string();
  MonitorVerdict v = monitor_run(trace, spec, scenario_id, offset);
  std::string line = verdict_to_json(v);
  if (!verdict_out.empty()) write_file(verdict_out, line);
  std::cout << line;
  return 0;
}

int cmd_campaign(CliState& st, const std::string& catalog_ref, const std::string& agent_str,
                 int jobs_flag, bool artifacts, bool svg, bool fail_on_violation) {
  st.finish();
  if (!agent_str.empty()) st.cfg.agent = EgoAgentSpec::parse(agent_str);
  if (jobs_flag > 0) st.cfg.jobs = jobs_flag;
  finalize_config(st.cfg);
  ScenarioCatalog catalog = load_catalog(catalog_ref.empty() ? st.cfg.catalog : catalog_ref);
  CampaignOptions opt;
  opt.jobs = st.cfg.jobs;
  if (artifacts || svg) opt.artifacts_dir = st.cfg.out_dir / "runs";
  opt.write_svg = svg;
  CampaignReport report = run_campaign(catalog, st.cfg.model, st.cfg.agent, st.cfg.search,
                                       st.cfg.sim, opt);
  fs::create_directories(st.cfg.out_dir);
  write_file(st.cfg.out_dir / "report.json", report_to_json(report));
  write_file(st.cfg.out_dir / "report.csv", report_to_csv(report));
  std::cout << report_to_csv(report) << "abstract coverage: " << report.abstract_found << "/"
            << report.catalog_size << "\nreport: " << (st.cfg.out_dir / "report.json").string()
            << "\n";
  if (fail_on_violation && report.union_row.cover_ok_and_prop_fail > 0) {
    std::cerr << "error [campaign]: " << report.union_row.cover_ok_and_prop_fail
              << " compliant run(s) violated the collision property\n";
    return 3;
  }
  return 0;
}

int cmd_export(CliState& st, const std::string& report_path, const std::string& csv_out,
               const std::string& svg_dir, const std::string& runs_dir) {
  st.finish();
  CampaignReport report = report_from_json(read_file(report_path));
  if (!csv_out.empty()) {
    write_file(csv_out, report_to_csv(report));
    std::cout << csv_out << "\n";
  }
  if (!svg_dir.empty()) {
    if (runs_dir.empty()) {
      throw std::runtime_error("--svg-dir needs --runs pointing at campaign artifacts");
    }
    const fs::path verdicts = fs::path(runs_dir) / "verdicts.jsonl";
    std::istringstream is(read_file(verdicts));
    fs::create_directories(svg_dir);
    std::string line;
    int count = 0;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      MonitorVerdict v = verdict_from_json(line);
      ConcreteTrace trace =
          trace_from_csv(read_file(fs::path(runs_dir) / "traces" / (v.scenario_id + ".csv")));
      trace.events = events_from_json(
          read_file(fs::path(runs_dir) / "traces" / (v.scenario_id + ".events.json")));
      write_file(fs::path(svg_dir) / (v.scenario_id + ".svg"), run_to_svg(trace, v));
      ++count;
    }
    std::cout << count << " svg files in " << svg_dir << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"coverage-driven scenario generation and verification toolchain"};
  app.require_subcommand(1);

  CliState st;

  std::string inline_spec, catalog_ref, agent_str;
  std::string trace_path, events_path, scenario_path, spec_str, scenario_id, verdict_out;
  std::string report_path, csv_out, svg_dir, runs_dir;
  double offset = 0;
  int jobs_flag = 0;
  bool scripts = false, artifacts = false, svg = false, fail_on_violation = false;

  CLI::App* generate = app.add_subcommand(
      "generate", "Search abstract scenario witnesses and write trace files");
  add_common(generate, st);
  generate->add_option("--spec", inline_spec, "Inline scenario \"a1,a2->b1,b2\"");
  generate->add_option("--catalog", catalog_ref, "\"default\", \"all\", or a DSL file");

  CLI::App* concretize_cmd = app.add_subcommand(
      "concretize", "Turn an abstract trace into the three offset scenario files");
  add_common(concretize_cmd, st);
  concretize_cmd->add_option("--trace", trace_path, "Abstract trace (.trace.jsonl)")
      ->required();
  concretize_cmd->add_flag("--scripts", scripts, "Also emit scenario-runner python exports");
  concretize_cmd->add_flag("--merge-drives", st.cfg.merge_drives,
                           "Merge consecutive equal-speed drive nodes");

  CLI::App* simulate = app.add_subcommand("simulate", "Run one scenario in the simulator");
  add_common(simulate, st);
  simulate->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  simulate->add_option("--agent", agent_str, "\"oracle\" or \"faulty:<dropout>:<latency>\"");

  CLI::App* monitor_cmd = app.add_subcommand(
      "monitor", "Check a concrete trace (ours or imported) against a scenario");
  add_common(monitor_cmd, st);
  monitor_cmd->add_option("--trace", trace_path, "Trace CSV")->required();
  monitor_cmd->add_option("--events", events_path,
                          "Collision events sidecar (default: derive or <trace>.events.json)");
  monitor_cmd->add_option("--spec", spec_str, "Inline scenario \"a1,a2->b1,b2\"")->required();
  monitor_cmd->add_option("--offset", offset, "Offset variant recorded in the verdict");
  monitor_cmd->add_option("--scenario-id", scenario_id, "Scenario id recorded in the verdict");
  monitor_cmd->add_option("--verdict-out", verdict_out, "Also write the verdict to this file");

  CLI::App* campaign_cmd =
      app.add_subcommand("campaign", "Full pipeline over a catalog with coverage report");
  add_common(campaign_cmd, st);
  campaign_cmd->add_option("--catalog", catalog_ref, "\"default\", \"all\", or a DSL file");
  campaign_cmd->add_option("--agent", agent_str, "\"oracle\" or \"faulty:<dropout>:<latency>\"");
  campaign_cmd->add_option("--jobs", jobs_flag, "Parallel per-spec pipelines");
  campaign_cmd->add_flag("--artifacts", artifacts, "Keep per-run traces and scenarios");
  campaign_cmd->add_flag("--svg", svg, "Write per-run x-t diagrams (implies --artifacts)");
  campaign_cmd->add_flag("--fail-on-violation", fail_on_violation,
                         "Exit nonzero when a compliant run violates the collision property");

  CLI::App* export_cmd = app.add_subcommand("export", "Re-emit a report as CSV and/or SVGs");
  add_common(export_cmd, st);
  export_cmd->add_option("--report", report_path, "report.json from a campaign")->required();
  export_cmd->add_option("--csv", csv_out, "Write the table CSV here");
  export_cmd->add_option("--svg-dir", svg_dir, "Write per-run SVGs here");
  export_cmd->add_option("--runs", runs_dir, "Campaign artifacts dir (for --svg-dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const char* stage = "cli";
  try {
    if (generate->parsed()) {
      stage = "generate";
      return cmd_generate(st, inline_spec, catalog_ref);
    }
    if (concretize_cmd->parsed()) {
      stage = "concretize";
      return cmd_concretize(st, trace_path, scripts);
    }
    if (simulate->parsed()) {
      stage = "simulate";
      return cmd_simulate(st, scenario_path, agent_str);
    }
    if (monitor_cmd->parsed()) {
      stage = "monitor";
      return cmd_monitor(st, trace_path, events_path, spec_str, offset, scenario_id,
                         verdict_out);
    }
    if (campaign_cmd->parsed()) {
      stage = "campaign";
      return cmd_campaign(st, catalog_ref, agent_str, jobs_flag, artifacts, svg,
                          fail_on_violation);
    }
    if (export_cmd->parsed()) {
      stage = "export";
      return cmd_export(st, report_path, csv_out, svg_dir, runs_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error [" << stage << "]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("scenforge");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace scenforge
