#pragma once

// Deterministic simulator: reset, step, reward accounting and state hashing.
//
// Mechanics: the agent walks on every non-wall cell. `pickup` takes the
// object lying on the agent's cell, `drop` places the held object on an
// empty counter, station or serving cell (serving consumes the object when
// its state is servable, otherwise the drop is ignored), `interact` applies
// the station's processing rule to the object lying on it. Anything else is
// a penalized no-op.

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gamereg/game_config.hpp"
#include "gamereg/game_types.hpp"

namespace gamereg {

inline constexpr double kStepPenalty = -0.1;
inline constexpr double kStageBonus = 1000.0;
inline constexpr double kQuestBonus = 10000.0;

inline bool holds(const Clause& c, const GameState& s, const GameConfig& cfg) {
  bool ok = true;
  if (c.object) {
    const auto* o = s.find(*c.object);
    if (o == nullptr) {
      ok = false;
    } else {
      if (c.state) ok = ok && o->state == *c.state;
      if (c.at) ok = ok && o->place == Place::cell && o->cell == *c.at;
      if (c.on) ok = ok && o->place == Place::cell && cfg.kind_name(o->cell) == *c.on;
      if (c.held) ok = ok && (o->place == Place::held) == *c.held;
      if (c.served) ok = ok && (o->place == Place::served) == *c.served;
    }
  }
  if (c.holding) {
    if (c.holding->empty()) {
      ok = ok && !s.inventory;
    } else if (*c.holding == "*") {
      ok = ok && s.inventory.has_value();
    } else {
      ok = ok && s.inventory == *c.holding;
    }
  }
  if (c.agent_at) ok = ok && s.agent == *c.agent_at;
  if (c.agent_on) ok = ok && cfg.kind_name(s.agent) == *c.agent_on;
  if (c.agent_scene) ok = ok && cfg.scene_at(s.agent) == *c.agent_scene;
  if (c.occupied) ok = ok && (s.object_on(s.agent) != nullptr) == *c.occupied;
  return c.negate ? !ok : ok;
}

inline bool holds(const Predicate& p, const GameState& s, const GameConfig& cfg) {
  for (const auto& c : p) {
    if (!holds(c, s, cfg)) return false;
  }
  return true;
}

// True when agent, inventory or any object differ (tick and progress ignored).
inline bool physically_changed(const GameState& a, const GameState& b) {
  return a.agent != b.agent || a.inventory != b.inventory || a.objects != b.objects;
}

inline bool bug_fires(const BugTrigger& bug, const GameState& before, Action action, const GameState& after,
                      const GameConfig& cfg) {
  if (bug.action && *bug.action != action) return false;
  if (bug.changed && physically_changed(before, after) != *bug.changed) return false;
  return holds(bug.before, before, cfg) && holds(bug.after, after, cfg);
}

inline GameState reset(const GameConfig& cfg, const TaskSpec& task) {
  if (!cfg.has_task(task.task_id)) throw Error("unknown task_id: " + task.task_id);
  GameState s;
  s.agent = cfg.start;
  s.objects.reserve(cfg.objects.size());
  for (const auto& o : cfg.objects) s.objects.push_back({o.id, Place::cell, o.cell, o.states.front()});
  return s;
}

inline GameState reset(const GameConfig& cfg, std::string_view task_id) { return reset(cfg, cfg.task(task_id)); }

// Bonus accounting is carried by the progress bits of the two states, so the
// function is pure over the transition.
inline double reward(const GameState& state, Action /*action*/, const GameState& next, const TaskSpec& task) {
  double r = kStepPenalty;
  const std::uint32_t stage_mask = task.stage_goals.empty() ? 0u : ((1u << task.stage_goals.size()) - 1u);
  const std::uint32_t newly = next.progress & ~state.progress;
  r += kStageBonus * std::popcount(newly & stage_mask);
  if (newly & kQuestBit) r += kQuestBonus;
  return r;
}

inline bool goal_reached(const GameState& s, const TaskSpec& task, const GameConfig& cfg) {
  return holds(task.goal, s, cfg);
}

namespace detail {

inline void fire_ui(const GameConfig& cfg, Action a, Cell where, bool applied, EventRecord& ev) {
  const std::string kind = cfg.kind_name(where);
  for (const auto& e : cfg.ui_events) {
    if (e.action == a && e.applied == applied && (e.on == "*" || e.on == kind)) ev.ui.push_back(e.label);
  }
}

}  // namespace detail

inline StepOutcome step(const GameState& state, Action action, const GameConfig& cfg, const TaskSpec& task) {
  StepOutcome out;
  GameState& next = out.next_state;
  next = state;
  next.tick = state.tick + 1;
  EventRecord& ev = out.event;
  ev.tick = state.tick;
  ev.action = action;
  ev.dt = cfg.time_of(action);

  bool applied = false;
  switch (action) {
    case Action::move_up:
    case Action::move_down:
    case Action::move_left:
    case Action::move_right: {
      Cell target = state.agent;
      if (action == Action::move_up) --target.row;
      if (action == Action::move_down) ++target.row;
      if (action == Action::move_left) --target.col;
      if (action == Action::move_right) ++target.col;
      if (cfg.in_bounds(target) && cfg.kind_at(target) != CellKind::wall) {
        next.agent = target;
        applied = true;
      }
      break;
    }
    case Action::pickup: {
      if (!state.inventory) {
        if (const auto* lying = state.object_on(state.agent)) {
          auto* o = next.find(lying->id);
          o->place = Place::held;
          next.inventory = o->id;
          ev.objects.push_back(o->id);
          applied = true;
        }
      }
      break;
    }
    case Action::drop: {
      const auto kind = cfg.kind_at(state.agent);
      const bool surface = kind == CellKind::counter || kind == CellKind::station || kind == CellKind::serving;
      if (state.inventory && surface && state.object_on(state.agent) == nullptr) {
        auto* o = next.find(*state.inventory);
        ev.objects.push_back(o->id);
        if (kind == CellKind::serving) {
          const auto* spec = cfg.object(o->id);
          const bool ok = spec != nullptr &&
                          std::find(spec->servable.begin(), spec->servable.end(), o->state) != spec->servable.end();
          if (ok) {
            o->place = Place::served;
            o->cell = state.agent;
            next.inventory.reset();
            applied = true;
          }
        } else {
          o->place = Place::cell;
          o->cell = state.agent;
          next.inventory.reset();
          applied = true;
        }
      }
      break;
    }
    case Action::interact: {
      if (cfg.kind_at(state.agent) == CellKind::station) {
        if (const auto* lying = state.object_on(state.agent)) {
          const auto* spec = cfg.object(lying->id);
          const auto* rule =
              spec ? cfg.rule_for(cfg.kind_name(state.agent), spec->kind, lying->state) : nullptr;
          ev.objects.push_back(lying->id);
          if (rule != nullptr) {
            next.find(lying->id)->state = rule->to;
            if (!rule->ui.empty()) ev.ui.push_back(rule->ui);
            applied = true;
          }
        }
      }
      break;
    }
  }
  detail::fire_ui(cfg, action, state.agent, applied, ev);

  for (std::size_t i = 0; i < task.stage_goals.size(); ++i) {
    const std::uint32_t bit = 1u << i;
    if (!(state.progress & bit) && holds(task.stage_goals[i], next, cfg)) next.progress |= bit;
  }
  if (!(state.progress & kQuestBit) && holds(task.goal, next, cfg)) next.progress |= kQuestBit;
  out.goal_reached = holds(task.goal, next, cfg);

  out.reward = reward(state, action, next, task);
  for (const auto& bug : cfg.bug_triggers) {
    if (bug_fires(bug, state, action, next, cfg)) out.triggered_bugs.push_back(bug.bug_id);
  }
  ev.bug_ids = out.triggered_bugs;
  ev.scene = cfg.scene_at(next.agent);
  return out;
}

// Canonical serialization in declared field order; tick is excluded.
inline std::string canonical_form(const GameState& s) {
  std::string out;
  out.reserve(32 + s.objects.size() * 24);
  out += "a:" + std::to_string(s.agent.row) + "," + std::to_string(s.agent.col);
  out += "|h:" + (s.inventory ? *s.inventory : std::string("-"));
  out += "|o:";
  for (const auto& o : s.objects) {
    out += o.id;
    out += '=';
    out += o.place == Place::cell ? 'c' : (o.place == Place::held ? 'h' : 's');
    out += std::to_string(o.cell.row) + "," + std::to_string(o.cell.col) + ":" + o.state + ";";
  }
  out += "|p:" + std::to_string(s.progress);
  return out;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline StateHash hash_state(const GameState& s) { return fnv1a64(canonical_form(s)); }

// --- serialization --------------------------------------------------------

inline nlohmann::ordered_json state_to_json(const GameState& s) {
  nlohmann::ordered_json j;
  j["agent"] = {s.agent.row, s.agent.col};
  j["inventory"] = s.inventory ? nlohmann::ordered_json(*s.inventory) : nlohmann::ordered_json(nullptr);
  auto objs = nlohmann::ordered_json::array();
  for (const auto& o : s.objects) {
    const char* place = o.place == Place::cell ? "cell" : (o.place == Place::held ? "held" : "served");
    objs.push_back({{"id", o.id}, {"place", place}, {"cell", {o.cell.row, o.cell.col}}, {"state", o.state}});
  }
  j["objects"] = objs;
  j["progress"] = s.progress;
  j["tick"] = s.tick;
  return j;
}

inline GameState state_from_json(const nlohmann::json& j) {
  GameState s;
  s.agent = {j.at("agent").at(0).get<int>(), j.at("agent").at(1).get<int>()};
  if (!j.at("inventory").is_null()) s.inventory = j["inventory"].get<std::string>();
  for (const auto& o : j.at("objects")) {
    ObjectState os;
    os.id = o.at("id").get<std::string>();
    const auto place = o.at("place").get<std::string>();
    os.place = place == "cell" ? Place::cell : (place == "held" ? Place::held : Place::served);
    os.cell = {o.at("cell").at(0).get<int>(), o.at("cell").at(1).get<int>()};
    os.state = o.at("state").get<std::string>();
    s.objects.push_back(std::move(os));
  }
  s.progress = j.at("progress").get<std::uint32_t>();
  s.tick = j.at("tick").get<std::int64_t>();
  return s;
}

// One event-log line: {tick, action, objects, scene, ui, bug_ids, dt}.
inline nlohmann::ordered_json event_to_json(const EventRecord& e) {
  nlohmann::ordered_json j;
  j["tick"] = e.tick;
  j["action"] = std::string(to_string(e.action));
  j["objects"] = e.objects;
  j["scene"] = e.scene;
  j["ui"] = e.ui;
  j["bug_ids"] = e.bug_ids;
  j["dt"] = e.dt;
  return j;
}

inline EventRecord event_from_json(const nlohmann::json& j) {
  EventRecord e;
  e.tick = j.at("tick").get<std::int64_t>();
  const auto a = parse_action(j.at("action").get<std::string>());
  if (!a) throw Error("event log: unknown action");
  e.action = *a;
  e.objects = j.at("objects").get<std::vector<std::string>>();
  e.scene = j.at("scene").get<std::string>();
  e.ui = j.at("ui").get<std::vector<std::string>>();
  e.bug_ids = j.at("bug_ids").get<std::vector<std::string>>();
  e.dt = j.at("dt").get<double>();
  return e;
}

}  // namespace gamereg
