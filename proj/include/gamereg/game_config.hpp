#pragma once

// Versioned game configuration: the JSON document format, loading and
// invariant validation.
//
// Top-level keys:
//   version_id     string
//   grid           array of equal-length strings. '.' floor, 'W' wall,
//                  '#' counter, 'X' serving, any letter listed in
//                  `stations` is a station of that kind
//   stations       {"B": "board", ...}
//   start          [row, col] of the agent
//   actions        ordered action alphabet
//   action_time    {"move_up": 1.0, ...} time-units per action (default 1.0)
//   objects        [{id, kind, cell, states, servable}]
//   rules          [{station, kind, from, to, ui}]
//   ui_events      [{action, on, applied, label}]
//   tasks          [{task_id, objective, related_rules, goal, stages,
//                    max_episode_steps, max_task_steps}]
//   bug_triggers   [{bug_id, category, description, action, before, after,
//                    changed}]
//   scene_map      {"legend": {"p": "pantry"}, "rows": [...]}
//   ui_components  [label, ...]
//   description    {name, game_description, basic_rules}   (optional)

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gamereg/error.hpp"
#include "gamereg/game_types.hpp"

namespace gamereg {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct GameConfig {
  std::string version_id;
  std::vector<std::string> grid;
  std::map<char, std::string> stations;
  Cell start;
  std::vector<Action> actions;
  std::array<double, kActionKinds> action_time{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  std::vector<ObjectSpec> objects;
  std::vector<ProcessingRule> rules;
  std::vector<UiEvent> ui_events;
  std::vector<TaskSpec> tasks;
  std::vector<BugTrigger> bug_triggers;
  std::map<char, std::string> scene_legend;
  std::vector<std::string> scene_rows;
  std::set<std::string> ui_components;
  GameDescription description;

  int rows() const { return static_cast<int>(grid.size()); }
  int cols() const { return grid.empty() ? 0 : static_cast<int>(grid.front().size()); }

  bool in_bounds(Cell c) const { return c.row >= 0 && c.col >= 0 && c.row < rows() && c.col < cols(); }

  CellKind kind_at(Cell c) const {
    if (!in_bounds(c)) return CellKind::wall;
    const char ch = grid[c.row][c.col];
    switch (ch) {
      case '.': return CellKind::floor;
      case 'W': return CellKind::wall;
      case '#': return CellKind::counter;
      case 'X': return CellKind::serving;
      default: return CellKind::station;
    }
  }

  // Kind name used by clauses and UI events: floor, wall, counter, serving,
  // or the station kind ("board", "stove", ...).
  std::string kind_name(Cell c) const {
    switch (kind_at(c)) {
      case CellKind::floor: return "floor";
      case CellKind::wall: return "wall";
      case CellKind::counter: return "counter";
      case CellKind::serving: return "serving";
      case CellKind::station: {
        const auto it = stations.find(grid[c.row][c.col]);
        return it == stations.end() ? "station" : it->second;
      }
    }
    return "wall";
  }

  std::string scene_at(Cell c) const {
    if (!in_bounds(c) || scene_rows.empty()) return "";
    const auto it = scene_legend.find(scene_rows[c.row][c.col]);
    return it == scene_legend.end() ? "" : it->second;
  }

  double time_of(Action a) const { return action_time[static_cast<std::size_t>(a)]; }

  const TaskSpec& task(std::string_view id) const {
    for (const auto& t : tasks) {
      if (t.task_id == id) return t;
    }
    throw Error("unknown task_id: " + std::string(id));
  }
  bool has_task(std::string_view id) const {
    return std::any_of(tasks.begin(), tasks.end(), [&](const TaskSpec& t) { return t.task_id == id; });
  }

  const ObjectSpec* object(std::string_view id) const {
    for (const auto& o : objects) {
      if (o.id == id) return &o;
    }
    return nullptr;
  }

  const ProcessingRule* rule_for(std::string_view station, std::string_view kind, std::string_view from) const {
    for (const auto& r : rules) {
      if (r.station == station && r.kind == kind && r.from == from) return &r;
    }
    return nullptr;
  }

  std::vector<Cell> cells_of_kind(std::string_view name) const {
    std::vector<Cell> out;
    for (int r = 0; r < rows(); ++r) {
      for (int c = 0; c < cols(); ++c) {
        if (kind_name({r, c}) == name) out.push_back({r, c});
      }
    }
    return out;
  }
};

namespace detail {

inline Cell cell_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw Error(where + ": expected [row, col]");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

inline ordered_json cell_to_json(Cell c) { return ordered_json::array({c.row, c.col}); }

inline Action action_from_json(const json& j, const std::string& where) {
  if (!j.is_string()) throw Error(where + ": expected action name");
  const auto a = parse_action(j.get<std::string>());
  if (!a) throw Error(where + ": unknown action \"" + j.get<std::string>() + "\"");
  return *a;
}

inline Clause clause_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw Error(where + ": clause must be an object");
  static const std::set<std::string> known = {"object", "state",    "at",          "on",       "held", "served",
                                              "holding", "agent_at", "agent_on", "agent_scene", "occupied", "not"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw Error(where + ": unknown clause key \"" + k + "\"");
  }
  Clause c;
  if (j.contains("object")) c.object = j["object"].get<std::string>();
  if (j.contains("state")) c.state = j["state"].get<std::string>();
  if (j.contains("at")) c.at = cell_from_json(j["at"], where + ".at");
  if (j.contains("on")) c.on = j["on"].get<std::string>();
  if (j.contains("held")) c.held = j["held"].get<bool>();
  if (j.contains("served")) c.served = j["served"].get<bool>();
  if (j.contains("holding")) c.holding = j["holding"].is_null() ? std::string() : j["holding"].get<std::string>();
  if (j.contains("agent_at")) c.agent_at = cell_from_json(j["agent_at"], where + ".agent_at");
  if (j.contains("agent_on")) c.agent_on = j["agent_on"].get<std::string>();
  if (j.contains("agent_scene")) c.agent_scene = j["agent_scene"].get<std::string>();
  if (j.contains("occupied")) c.occupied = j["occupied"].get<bool>();
  if (j.contains("not")) c.negate = j["not"].get<bool>();
  if ((c.state || c.at || c.on || c.held || c.served) && !c.object) {
    throw Error(where + ": object conditions require \"object\"");
  }
  return c;
}

inline ordered_json clause_to_json(const Clause& c) {
  ordered_json j = ordered_json::object();
  if (c.object) j["object"] = *c.object;
  if (c.state) j["state"] = *c.state;
  if (c.at) j["at"] = cell_to_json(*c.at);
  if (c.on) j["on"] = *c.on;
  if (c.held) j["held"] = *c.held;
  if (c.served) j["served"] = *c.served;
  if (c.holding) j["holding"] = c.holding->empty() ? ordered_json(nullptr) : ordered_json(*c.holding);
  if (c.agent_at) j["agent_at"] = cell_to_json(*c.agent_at);
  if (c.agent_on) j["agent_on"] = *c.agent_on;
  if (c.agent_scene) j["agent_scene"] = *c.agent_scene;
  if (c.occupied) j["occupied"] = *c.occupied;
  if (c.negate) j["not"] = true;
  return j;
}

inline Predicate predicate_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(where + ": predicate must be an array of clauses");
  Predicate p;
  for (std::size_t i = 0; i < j.size(); ++i) p.push_back(clause_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  return p;
}

inline ordered_json predicate_to_json(const Predicate& p) {
  ordered_json j = ordered_json::array();
  for (const auto& c : p) j.push_back(clause_to_json(c));
  return j;
}

inline std::map<char, std::string> char_map_from_json(const json& j, const std::string& where) {
  std::map<char, std::string> out;
  if (!j.is_object()) throw Error(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (k.size() != 1) throw Error(where + ": keys must be single characters");
    out[k[0]] = v.get<std::string>();
  }
  return out;
}

inline void check_clause(const GameConfig& cfg, const Clause& c, const std::string& where) {
  if (c.object) {
    const auto* spec = cfg.object(*c.object);
    if (spec == nullptr) throw Error(where + ": unknown object \"" + *c.object + "\"");
    if (c.state && std::find(spec->states.begin(), spec->states.end(), *c.state) == spec->states.end()) {
      throw Error(where + ": object \"" + *c.object + "\" has no state \"" + *c.state + "\"");
    }
  }
  if (c.holding && !c.holding->empty() && *c.holding != "*" && cfg.object(*c.holding) == nullptr) {
    throw Error(where + ": unknown object \"" + *c.holding + "\"");
  }
  if (c.at && !cfg.in_bounds(*c.at)) throw Error(where + ".at: cell out of bounds");
  if (c.agent_at && !cfg.in_bounds(*c.agent_at)) throw Error(where + ".agent_at: cell out of bounds");
}

}  // namespace detail

// Checks every config invariant; throws Error naming the offending field.
inline void validate(const GameConfig& cfg) {
  if (cfg.version_id.empty()) throw Error("version_id: must be non-empty");
  if (cfg.grid.empty() || cfg.grid.front().empty()) throw Error("grid: must be non-empty");
  for (std::size_t r = 0; r < cfg.grid.size(); ++r) {
    if (cfg.grid[r].size() != cfg.grid.front().size()) {
      throw Error("grid[" + std::to_string(r) + "]: grid must be rectangular");
    }
    for (char ch : cfg.grid[r]) {
      if (ch != '.' && ch != 'W' && ch != '#' && ch != 'X' && !cfg.stations.count(ch)) {
        throw Error("grid[" + std::to_string(r) + "]: undeclared cell symbol '" + std::string(1, ch) + "'");
      }
    }
  }
  if (!cfg.in_bounds(cfg.start)) throw Error("start: agent cell out of bounds");
  if (cfg.kind_at(cfg.start) == CellKind::wall) throw Error("start: agent starts inside a wall");
  if (cfg.actions.empty()) throw Error("actions: alphabet must be non-empty");
  {
    std::set<Action> seen(cfg.actions.begin(), cfg.actions.end());
    if (seen.size() != cfg.actions.size()) throw Error("actions: duplicate action kind");
  }
  for (std::size_t i = 0; i < kActionKinds; ++i) {
    if (!(cfg.action_time[i] > 0.0)) throw Error("action_time." + std::string(kActionNames[i]) + ": must be > 0");
  }

  std::set<std::string> ids;
  std::set<Cell> occupied;
  for (std::size_t i = 0; i < cfg.objects.size(); ++i) {
    const auto& o = cfg.objects[i];
    const std::string where = "objects[" + std::to_string(i) + "]";
    if (o.id.empty()) throw Error(where + ".id: must be non-empty");
    if (!ids.insert(o.id).second) throw Error(where + ".id: duplicate object id \"" + o.id + "\"");
    if (!cfg.in_bounds(o.cell)) throw Error(where + ".cell: object cell out of bounds");
    const auto kind = cfg.kind_at(o.cell);
    if (kind != CellKind::counter && kind != CellKind::station) {
      throw Error(where + ".cell: objects must start on a counter or station");
    }
    if (!occupied.insert(o.cell).second) throw Error(where + ".cell: cell already holds an object");
    if (o.states.empty()) throw Error(where + ".states: must be non-empty");
    for (const auto& s : o.servable) {
      if (std::find(o.states.begin(), o.states.end(), s) == o.states.end()) {
        throw Error(where + ".servable: \"" + s + "\" is not a declared state");
      }
    }
  }

  std::set<std::string> station_kinds;
  for (const auto& [ch, kind] : cfg.stations) station_kinds.insert(kind);
  for (std::size_t i = 0; i < cfg.rules.size(); ++i) {
    const auto& r = cfg.rules[i];
    const std::string where = "rules[" + std::to_string(i) + "]";
    if (!station_kinds.count(r.station)) throw Error(where + ".station: unknown station \"" + r.station + "\"");
    const bool any_kind = std::any_of(cfg.objects.begin(), cfg.objects.end(), [&](const ObjectSpec& o) {
      return o.kind == r.kind && std::find(o.states.begin(), o.states.end(), r.from) != o.states.end() &&
             std::find(o.states.begin(), o.states.end(), r.to) != o.states.end();
    });
    if (!any_kind) throw Error(where + ": no object of kind \"" + r.kind + "\" declares states " + r.from + "/" + r.to);
    if (!r.ui.empty() && !cfg.ui_components.count(r.ui)) throw Error(where + ".ui: undeclared ui component");
  }
  for (std::size_t i = 0; i < cfg.ui_events.size(); ++i) {
    if (!cfg.ui_components.count(cfg.ui_events[i].label)) {
      throw Error("ui_events[" + std::to_string(i) + "].label: undeclared ui component");
    }
  }

  if (!cfg.scene_rows.empty()) {
    if (static_cast<int>(cfg.scene_rows.size()) != cfg.rows()) throw Error("scene_map.rows: shape differs from grid");
    for (const auto& row : cfg.scene_rows) {
      if (static_cast<int>(row.size()) != cfg.cols()) throw Error("scene_map.rows: shape differs from grid");
    }
  }

  if (cfg.tasks.empty()) throw Error("tasks: at least one task required");
  std::set<std::string> task_ids;
  for (std::size_t i = 0; i < cfg.tasks.size(); ++i) {
    const auto& t = cfg.tasks[i];
    const std::string where = "tasks[" + std::to_string(i) + "]";
    if (t.task_id.empty()) throw Error(where + ".task_id: must be non-empty");
    if (!task_ids.insert(t.task_id).second) throw Error(where + ".task_id: duplicate task id");
    if (t.goal.empty()) throw Error(where + ".goal: must be non-empty");
    if (t.max_episode_steps <= 0) throw Error(where + ".max_episode_steps: must be > 0");
    if (t.max_task_steps <= 0) throw Error(where + ".max_task_steps: must be > 0");
    if (t.stage_goals.size() > 31) throw Error(where + ".stages: at most 31 stages");
    for (std::size_t c = 0; c < t.goal.size(); ++c) {
      detail::check_clause(cfg, t.goal[c], where + ".goal[" + std::to_string(c) + "]");
    }
    for (std::size_t s = 0; s < t.stage_goals.size(); ++s) {
      if (t.stage_goals[s].empty()) throw Error(where + ".stages[" + std::to_string(s) + "]: empty stage");
      for (std::size_t c = 0; c < t.stage_goals[s].size(); ++c) {
        detail::check_clause(cfg, t.stage_goals[s][c],
                             where + ".stages[" + std::to_string(s) + "][" + std::to_string(c) + "]");
      }
    }
    if (!t.stage_goals.empty()) {
      for (const auto& c : t.stage_goals.back()) {
        if (std::find(t.goal.begin(), t.goal.end(), c) == t.goal.end()) {
          throw Error(where + ".goal: goal does not entail the last stage");
        }
      }
    }
  }

  std::set<std::string> bug_ids;
  for (std::size_t i = 0; i < cfg.bug_triggers.size(); ++i) {
    const auto& b = cfg.bug_triggers[i];
    const std::string where = "bug_triggers[" + std::to_string(i) + "]";
    if (b.bug_id.empty()) throw Error(where + ".bug_id: must be non-empty");
    if (!bug_ids.insert(b.bug_id).second) throw Error(where + ".bug_id: duplicate bug id \"" + b.bug_id + "\"");
    for (std::size_t c = 0; c < b.before.size(); ++c) {
      detail::check_clause(cfg, b.before[c], where + ".before[" + std::to_string(c) + "]");
    }
    for (std::size_t c = 0; c < b.after.size(); ++c) {
      detail::check_clause(cfg, b.after[c], where + ".after[" + std::to_string(c) + "]");
    }
  }
}

inline GameConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error("config: expected a JSON object");
  for (const char* key : {"version_id", "grid", "objects", "tasks", "bug_triggers", "scene_map", "ui_components"}) {
    if (!j.contains(key)) throw Error(std::string(key) + ": missing required key");
  }
  GameConfig cfg;
  try {
    cfg.version_id = j.at("version_id").get<std::string>();
    cfg.grid = j.at("grid").get<std::vector<std::string>>();
    if (j.contains("stations")) cfg.stations = detail::char_map_from_json(j["stations"], "stations");
    cfg.start = j.contains("start") ? detail::cell_from_json(j["start"], "start") : Cell{};
    if (j.contains("actions")) {
      for (std::size_t i = 0; i < j["actions"].size(); ++i) {
        cfg.actions.push_back(detail::action_from_json(j["actions"][i], "actions[" + std::to_string(i) + "]"));
      }
    } else {
      for (std::size_t i = 0; i < kActionKinds; ++i) cfg.actions.push_back(static_cast<Action>(i));
    }
    if (j.contains("action_time")) {
      for (const auto& [name, value] : j["action_time"].items()) {
        const auto a = detail::action_from_json(name, "action_time");
        cfg.action_time[static_cast<std::size_t>(a)] = value.get<double>();
      }
    }
    const auto& objs = j.at("objects");
    for (std::size_t i = 0; i < objs.size(); ++i) {
      const auto& o = objs[i];
      const std::string where = "objects[" + std::to_string(i) + "]";
      ObjectSpec spec;
      spec.id = o.at("id").get<std::string>();
      spec.kind = o.value("kind", spec.id);
      spec.cell = detail::cell_from_json(o.at("cell"), where + ".cell");
      spec.states = o.at("states").get<std::vector<std::string>>();
      spec.servable = o.value("servable", std::vector<std::string>{});
      cfg.objects.push_back(std::move(spec));
    }
    if (j.contains("rules")) {
      for (const auto& r : j["rules"]) {
        cfg.rules.push_back({r.at("station").get<std::string>(), r.at("kind").get<std::string>(),
                             r.at("from").get<std::string>(), r.at("to").get<std::string>(), r.value("ui", "")});
      }
    }
    if (j.contains("ui_events")) {
      for (std::size_t i = 0; i < j["ui_events"].size(); ++i) {
        const auto& e = j["ui_events"][i];
        UiEvent ev;
        ev.action = detail::action_from_json(e.at("action"), "ui_events[" + std::to_string(i) + "].action");
        ev.on = e.value("on", "*");
        ev.applied = e.value("applied", true);
        ev.label = e.at("label").get<std::string>();
        cfg.ui_events.push_back(std::move(ev));
      }
    }
    const auto& tasks = j.at("tasks");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const auto& t = tasks[i];
      const std::string where = "tasks[" + std::to_string(i) + "]";
      TaskSpec spec;
      spec.task_id = t.at("task_id").get<std::string>();
      spec.objective = t.value("objective", "");
      spec.related_rules = t.value("related_rules", "");
      spec.goal = detail::predicate_from_json(t.at("goal"), where + ".goal");
      if (t.contains("stages")) {
        for (std::size_t s = 0; s < t["stages"].size(); ++s) {
          spec.stage_goals.push_back(
              detail::predicate_from_json(t["stages"][s], where + ".stages[" + std::to_string(s) + "]"));
        }
      }
      spec.max_episode_steps = t.value("max_episode_steps", 100);
      spec.max_task_steps = t.value("max_task_steps", 5000);
      cfg.tasks.push_back(std::move(spec));
    }
    const auto& bugs = j.at("bug_triggers");
    for (std::size_t i = 0; i < bugs.size(); ++i) {
      const auto& b = bugs[i];
      const std::string where = "bug_triggers[" + std::to_string(i) + "]";
      BugTrigger trig;
      trig.bug_id = b.at("bug_id").get<std::string>();
      trig.category = b.value("category", "");
      trig.description = b.value("description", "");
      if (b.contains("action")) trig.action = detail::action_from_json(b["action"], where + ".action");
      if (b.contains("before")) trig.before = detail::predicate_from_json(b["before"], where + ".before");
      if (b.contains("after")) trig.after = detail::predicate_from_json(b["after"], where + ".after");
      if (b.contains("changed")) trig.changed = b["changed"].get<bool>();
      cfg.bug_triggers.push_back(std::move(trig));
    }
    const auto& scenes = j.at("scene_map");
    if (scenes.contains("legend")) cfg.scene_legend = detail::char_map_from_json(scenes["legend"], "scene_map.legend");
    cfg.scene_rows = scenes.value("rows", std::vector<std::string>{});
    const auto ui = j.at("ui_components").get<std::vector<std::string>>();
    cfg.ui_components.insert(ui.begin(), ui.end());
    if (j.contains("description")) {
      const auto& d = j["description"];
      cfg.description.name = d.value("name", cfg.description.name);
      cfg.description.game_description = d.value("game_description", "");
      cfg.description.basic_rules = d.value("basic_rules", "");
    }
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

inline ordered_json config_to_json(const GameConfig& cfg) {
  ordered_json j;
  j["version_id"] = cfg.version_id;
  j["description"] = {{"name", cfg.description.name},
                      {"game_description", cfg.description.game_description},
                      {"basic_rules", cfg.description.basic_rules}};
  j["grid"] = cfg.grid;
  ordered_json stations = ordered_json::object();
  for (const auto& [ch, kind] : cfg.stations) stations[std::string(1, ch)] = kind;
  j["stations"] = stations;
  j["start"] = detail::cell_to_json(cfg.start);
  ordered_json actions = ordered_json::array();
  for (auto a : cfg.actions) actions.push_back(std::string(to_string(a)));
  j["actions"] = actions;
  ordered_json times = ordered_json::object();
  for (std::size_t i = 0; i < kActionKinds; ++i) times[std::string(kActionNames[i])] = cfg.action_time[i];
  j["action_time"] = times;
  ordered_json objs = ordered_json::array();
  for (const auto& o : cfg.objects) {
    objs.push_back({{"id", o.id},
                    {"kind", o.kind},
                    {"cell", detail::cell_to_json(o.cell)},
                    {"states", o.states},
                    {"servable", o.servable}});
  }
  j["objects"] = objs;
  ordered_json rules = ordered_json::array();
  for (const auto& r : cfg.rules) {
    rules.push_back({{"station", r.station}, {"kind", r.kind}, {"from", r.from}, {"to", r.to}, {"ui", r.ui}});
  }
  j["rules"] = rules;
  ordered_json ui_events = ordered_json::array();
  for (const auto& e : cfg.ui_events) {
    ui_events.push_back(
        {{"action", std::string(to_string(e.action))}, {"on", e.on}, {"applied", e.applied}, {"label", e.label}});
  }
  j["ui_events"] = ui_events;
  ordered_json tasks = ordered_json::array();
  for (const auto& t : cfg.tasks) {
    ordered_json stages = ordered_json::array();
    for (const auto& s : t.stage_goals) stages.push_back(detail::predicate_to_json(s));
    tasks.push_back({{"task_id", t.task_id},
                     {"objective", t.objective},
                     {"related_rules", t.related_rules},
                     {"goal", detail::predicate_to_json(t.goal)},
                     {"stages", stages},
                     {"max_episode_steps", t.max_episode_steps},
                     {"max_task_steps", t.max_task_steps}});
  }
  j["tasks"] = tasks;
  ordered_json bugs = ordered_json::array();
  for (const auto& b : cfg.bug_triggers) {
    ordered_json bj = {{"bug_id", b.bug_id}, {"category", b.category}, {"description", b.description}};
    if (b.action) bj["action"] = std::string(to_string(*b.action));
    bj["before"] = detail::predicate_to_json(b.before);
    bj["after"] = detail::predicate_to_json(b.after);
    if (b.changed) bj["changed"] = *b.changed;
    bugs.push_back(bj);
  }
  j["bug_triggers"] = bugs;
  ordered_json legend = ordered_json::object();
  for (const auto& [ch, label] : cfg.scene_legend) legend[std::string(1, ch)] = label;
  j["scene_map"] = {{"legend", legend}, {"rows", cfg.scene_rows}};
  j["ui_components"] = std::vector<std::string>(cfg.ui_components.begin(), cfg.ui_components.end());
  return j;
}

inline GameConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("config parse failure in " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace gamereg
