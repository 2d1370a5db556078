#include "scenforge/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace scenforge {

std::string spec_auto_id(const GridConfig& first, const GridConfig& second) {
  std::ostringstream os;
  os << "s_" << cell_number(first.car1_cell) << cell_number(first.car2_cell) << "_"
     << cell_number(second.car1_cell) << cell_number(second.car2_cell);
  return os.str();
}

ScenarioCatalog enumerate_all() {
  ScenarioCatalog cat;
  cat.specs.reserve(4096);
  for (int a1 = 1; a1 <= 8; ++a1)
    for (int a2 = 1; a2 <= 8; ++a2)
      for (int b1 = 1; b1 <= 8; ++b1)
        for (int b2 = 1; b2 <= 8; ++b2) {
          GridConfig first{cell_from_number(a1), cell_from_number(a2)};
          GridConfig second{cell_from_number(b1), cell_from_number(b2)};
          cat.specs.push_back({spec_auto_id(first, second), first, second});
        }
  return cat;
}

namespace {

GridConfig cfg(int a, int b) { return GridConfig{cell_from_number(a), cell_from_number(b)}; }

std::vector<GridConfig> make_start_configs() {
  // Mirror-symmetric pairs over the front and side cells (left<->right swaps
  // 1<->3 and 4<->5, plus the rear mirror family), then same-cell pairs.
  std::vector<GridConfig> v = {
      cfg(1, 3), cfg(3, 1), cfg(2, 2), cfg(4, 5), cfg(5, 4), cfg(6, 8), cfg(8, 6), cfg(7, 7),
      cfg(1, 1), cfg(3, 3), cfg(4, 4), cfg(5, 5),
  };
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<GridConfig> make_end_configs() {
  // Post-maneuver scenes: one car behind the ego, the other beside it.
  std::vector<GridConfig> v;
  for (int rear : {6, 7, 8})
    for (int side : {4, 5}) {
      v.push_back(cfg(rear, side));
      v.push_back(cfg(side, rear));
    }
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

const std::vector<GridConfig>& default_start_configs() {
  static const std::vector<GridConfig> starts = make_start_configs();
  return starts;
}

const std::vector<GridConfig>& default_end_configs() {
  static const std::vector<GridConfig> ends = make_end_configs();
  return ends;
}

ScenarioCatalog default_catalog() {
  ScenarioCatalog cat;
  cat.specs.reserve(144);
  for (const GridConfig& a : default_start_configs())
    for (const GridConfig& b : default_end_configs())
      cat.specs.push_back({spec_auto_id(a, b), a, b});
  return cat;
}

DslError::DslError(DslErrorKind kind, int line, int col, const std::string& msg)
    : std::runtime_error("line " + std::to_string(line) + ", col " + std::to_string(col) +
                         ": " + msg),
      kind_(kind),
      line_(line),
      col_(col) {}

namespace {

struct Scanner {
  std::string_view text;
  std::size_t i = 0;
  int line = 1;
  int col = 1;

  void advance() {
    if (i >= text.size()) return;
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  }

  void skip_ws_and_comments() {
    while (i < text.size()) {
      char c = text[i];
      if (c == '#') {
        while (i < text.size() && text[i] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  bool eof() {
    skip_ws_and_comments();
    return i >= text.size();
  }

  [[noreturn]] void fail(const std::string& msg, int at_line, int at_col) {
    throw DslError(DslErrorKind::Syntax, at_line, at_col, msg);
  }

  void expect_char(char c) {
    skip_ws_and_comments();
    if (i >= text.size() || text[i] != c) {
      fail(std::string("expected '") + c + "'", line, col);
    }
    advance();
  }

  std::string word() {
    skip_ws_and_comments();
    int l = line, c = col;
    std::size_t start = i;
    while (i < text.size()) {
      char ch = text[i];
      if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') {
        advance();
      } else {
        break;
      }
    }
    if (i == start) fail("expected identifier", l, c);
    return std::string(text.substr(start, i - start));
  }

  void expect_keyword(const std::string& kw) {
    skip_ws_and_comments();
    int l = line, c = col;
    std::string w = word();
    if (w != kw) fail("expected '" + kw + "', got '" + w + "'", l, c);
  }

  GridCell car_cell(int which) {
    expect_keyword(which == 1 ? "car1" : "car2");
    expect_char('@');
    skip_ws_and_comments();
    int l = line, c = col;
    std::size_t start = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) advance();
    if (i == start) fail("expected cell number", l, c);
    int n = std::stoi(std::string(text.substr(start, i - start)));
    if (n < 1 || n > 8) {
      throw DslError(DslErrorKind::CellOutOfRange, l, c,
                     "cell " + std::to_string(n) + " out of range 1..8");
    }
    return cell_from_number(n);
  }

  GridConfig config_block() {
    expect_char('{');
    GridCell c1 = car_cell(1);
    expect_char(',');
    GridCell c2 = car_cell(2);
    expect_char('}');
    return GridConfig{c1, c2};
  }
};

}  // namespace

ScenarioCatalog parse_scenario_dsl(std::string_view text) {
  Scanner s{text};
  ScenarioCatalog cat;
  std::set<std::string> seen_ids;
  std::set<std::pair<GridConfig, GridConfig>> seen_pairs;
  while (!s.eof()) {
    s.expect_keyword("scenario");
    s.skip_ws_and_comments();
    int id_line = s.line, id_col = s.col;
    std::string id = s.word();
    if (!seen_ids.insert(id).second) {
      throw DslError(DslErrorKind::DuplicateId, id_line, id_col, "duplicate id '" + id + "'");
    }
    s.expect_char(':');
    s.expect_keyword("reach");
    GridConfig first = s.config_block();
    s.expect_keyword("then");
    GridConfig second = s.config_block();
    if (!seen_pairs.insert({first, second}).second) {
      throw DslError(DslErrorKind::DuplicateId, id_line, id_col,
                     "duplicate scenario configuration for '" + id + "'");
    }
    cat.specs.push_back({std::move(id), first, second});
  }
  return cat;
}

std::string print_scenario_dsl(const ScenarioCatalog& catalog) {
  std::ostringstream os;
  for (const ScenarioSpec& s : catalog.specs) {
    os << "scenario " << s.id << ": reach { car1@" << cell_number(s.first.car1_cell)
       << ", car2@" << cell_number(s.first.car2_cell) << " } then { car1@"
       << cell_number(s.second.car1_cell) << ", car2@" << cell_number(s.second.car2_cell)
       << " }\n";
  }
  return os.str();
}

std::string catalog_to_json(const ScenarioCatalog& catalog) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const ScenarioSpec& s : catalog.specs) {
    nlohmann::ordered_json o;
    o["id"] = s.id;
    o["first"] = {cell_number(s.first.car1_cell), cell_number(s.first.car2_cell)};
    o["second"] = {cell_number(s.second.car1_cell), cell_number(s.second.car2_cell)};
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

ScenarioCatalog catalog_from_json(std::string_view json_text) {
  nlohmann::json arr = nlohmann::json::parse(json_text);
  ScenarioCatalog cat;
  for (const auto& o : arr) {
    ScenarioSpec s;
    s.id = o.at("id").get<std::string>();
    s.first = GridConfig{cell_from_number(o.at("first").at(0).get<int>()),
                         cell_from_number(o.at("first").at(1).get<int>())};
    s.second = GridConfig{cell_from_number(o.at("second").at(0).get<int>()),
                          cell_from_number(o.at("second").at(1).get<int>())};
    cat.specs.push_back(std::move(s));
  }
  return cat;
}

ScenarioSpec parse_inline_spec(std::string_view text) {
  // "a1,a2->b1,b2"
  auto fail = [&] {
    throw std::invalid_argument("bad inline spec '" + std::string(text) +
                                "', expected \"a1,a2->b1,b2\" with cells in 1..8");
  };
  auto arrow = text.find("->");
  if (arrow == std::string_view::npos) fail();
  auto parse_pair = [&](std::string_view part) -> GridConfig {
    auto comma = part.find(',');
    if (comma == std::string_view::npos) fail();
    auto parse_cell = [&](std::string_view v) -> GridCell {
      int n = 0;
      bool any = false;
      for (char c : v) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (!std::isdigit(static_cast<unsigned char>(c))) fail();
        n = n * 10 + (c - '0');
        any = true;
      }
      if (!any || n < 1 || n > 8) fail();
      return cell_from_number(n);
    };
    return GridConfig{parse_cell(part.substr(0, comma)), parse_cell(part.substr(comma + 1))};
  };
  GridConfig first = parse_pair(text.substr(0, arrow));
  GridConfig second = parse_pair(text.substr(arrow + 2));
  return ScenarioSpec{spec_auto_id(first, second), first, second};
}

bool config_holds(const GridConfig& cfg, const WorldState& w, const GridBounds& bounds) {
  return grid_cells(w.ego, w.car1, bounds).contains(cfg.car1_cell) &&
         grid_cells(w.ego, w.car2, bounds).contains(cfg.car2_cell);
}

bool ReachObjective::phase1_holds(const WorldState& w, const GridBounds& bounds) const {
  return config_holds(first, w, bounds);
}

bool ReachObjective::phase2_holds(const WorldState& w, const GridBounds& bounds) const {
  return config_holds(second, w, bounds);
}

std::optional<std::pair<int, int>> ReachObjective::satisfied_at(
    const std::vector<WorldState>& states, const GridBounds& bounds) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (!phase1_holds(states[i], bounds)) continue;
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      if (phase2_holds(states[j], bounds)) {
        return std::make_pair(static_cast<int>(i), static_cast<int>(j));
      }
    }
    return std::nullopt;  // earliest phase-1 index is optimal, no later retry needed
  }
  return std::nullopt;
}

ReachObjective spec_to_objective(const ScenarioSpec& spec) {
  return ReachObjective{spec.first, spec.second};
}

}  // namespace scenforge
