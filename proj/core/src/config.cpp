#include "scenforge/config.hpp"

#include <fstream>
#include <sstream>

namespace scenforge {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<Rat> parse_menu(const std::string& value) {
  std::vector<Rat> menu;
  std::istringstream is(value);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) menu.push_back(rat_parse(item));
  }
  return menu;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

}  // namespace

void apply_config_entry(ToolConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "model.time_step") cfg.model.time_step = rat_parse(value);
  else if (key == "model.ego_cruise_speed") cfg.model.ego_cruise_speed = rat_parse(value);
  else if (key == "model.non_ego_speed_min") cfg.model.non_ego_speed_min = rat_parse(value);
  else if (key == "model.non_ego_speed_max") cfg.model.non_ego_speed_max = rat_parse(value);
  else if (key == "model.max_acceleration") cfg.model.max_acceleration = rat_parse(value);
  else if (key == "model.max_braking") cfg.model.max_braking = rat_parse(value);
  else if (key == "model.safe_distance") cfg.model.safe_distance = rat_parse(value);
  else if (key == "model.max_lane") cfg.model.max_lane = std::stoi(value);
  else if (key == "model.max_lane_change_speed") cfg.model.max_lane_change_speed = rat_parse(value);
  else if (key == "model.max_lane_change_acceleration")
    cfg.model.max_lane_change_acceleration = rat_parse(value);
  else if (key == "model.max_lane_change_braking")
    cfg.model.max_lane_change_braking = rat_parse(value);
  else if (key == "model.lane_change_spacing_steps")
    cfg.model.lane_change_spacing_steps = std::stoi(value);
  else if (key == "model.lane_change_pos_factor")
    cfg.model.lane_change_pos_factor = rat_parse(value);
  else if (key == "search.max_steps") cfg.search.max_steps = std::stoi(value);
  else if (key == "search.accel_menu") cfg.search.accel_menu = parse_menu(value);
  else if (key == "search.allow_lane_actions") cfg.search.allow_lane_actions = parse_bool(value);
  else if (key == "search.node_budget") cfg.search.node_budget = std::stoull(value);
  else if (key == "sim.dt") cfg.sim.dt = std::stod(value);
  else if (key == "sim.max_sim_time") cfg.sim.max_sim_time = std::stod(value);
  else if (key == "sim.lane_width") cfg.sim.lane_width = std::stod(value);
  else if (key == "sim.vehicle_length") cfg.sim.vehicle_length = std::stod(value);
  else if (key == "sim.vehicle_width") cfg.sim.vehicle_width = std::stod(value);
  else if (key == "agent") cfg.agent = EgoAgentSpec::parse(value);
  else if (key == "catalog") cfg.catalog = value;
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "seed") cfg.seed = std::stoull(value);
  else if (key == "jobs") cfg.jobs = std::stoi(value);
  else if (key == "merge_drives") cfg.merge_drives = parse_bool(value);
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

void apply_config_file(ToolConfig& cfg, const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                  ": expected `key = value`");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      apply_config_entry(cfg, key, value);
    } catch (const std::exception& e) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": " +
                                  e.what());
    }
  }
}

void finalize_config(ToolConfig& cfg) {
  cfg.search.rng_seed = cfg.seed;
  cfg.sim.rng_seed = cfg.seed;
  cfg.model.validate();
  cfg.sim.validate();
  cfg.agent.validate();
  cfg.search.validate(cfg.model);
  if (cfg.jobs < 1) throw std::invalid_argument("jobs must be >= 1");
}

}  // namespace scenforge
