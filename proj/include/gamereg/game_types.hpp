#pragma once

// Value types of the grid-world cooking simulator.

#include <array>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gamereg/error.hpp"

namespace gamereg {

enum class Action : std::uint8_t {
  move_up,
  move_down,
  move_left,
  move_right,
  pickup,
  drop,
  interact,
};

inline constexpr std::size_t kActionKinds = 7;

inline constexpr std::array<std::string_view, kActionKinds> kActionNames = {
    "move_up", "move_down", "move_left", "move_right", "pickup", "drop", "interact"};

inline std::string_view to_string(Action a) { return kActionNames[static_cast<std::size_t>(a)]; }

inline std::optional<Action> parse_action(std::string_view name) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i) {
    if (kActionNames[i] == name) return static_cast<Action>(i);
  }
  return std::nullopt;
}

inline bool is_move(Action a) { return static_cast<std::uint8_t>(a) <= 3; }

using StateHash = std::uint64_t;

inline std::string hash_hex(StateHash h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline StateHash parse_hash_hex(const std::string& text) {
  if (text.size() != 16) throw Error("malformed state hash: " + text);
  std::size_t used = 0;
  const auto value = std::stoull(text, &used, 16);
  if (used != text.size()) throw Error("malformed state hash: " + text);
  return value;
}

struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

enum class CellKind : std::uint8_t { floor, wall, counter, station, serving };

// One conjunct of a declarative condition over a GameState. Every populated
// field must hold; `negate` inverts the whole clause.
struct Clause {
  std::optional<std::string> object;
  std::optional<std::string> state;
  std::optional<Cell> at;
  std::optional<std::string> on;  // cell kind name or station kind
  std::optional<bool> held;
  std::optional<bool> served;
  std::optional<std::string> holding;  // "" = empty hands, "*" = anything
  std::optional<Cell> agent_at;
  std::optional<std::string> agent_on;
  std::optional<std::string> agent_scene;
  std::optional<bool> occupied;  // an object lies on the agent's cell
  bool negate = false;

  bool operator==(const Clause&) const = default;
};

using Predicate = std::vector<Clause>;

struct TaskSpec {
  std::string task_id;
  std::string objective;
  std::string related_rules;
  Predicate goal;
  std::vector<Predicate> stage_goals;
  int max_episode_steps = 100;
  int max_task_steps = 5000;
};

struct BugTrigger {
  std::string bug_id;
  std::string category;
  std::string description;
  std::optional<Action> action;
  Predicate before;
  Predicate after;
  std::optional<bool> changed;  // physical state changed by the transition
};

struct ObjectSpec {
  std::string id;
  std::string kind;
  Cell cell;
  std::vector<std::string> states;  // first entry is the initial state
  std::vector<std::string> servable;
};

struct ProcessingRule {
  std::string station;
  std::string kind;
  std::string from;
  std::string to;
  std::string ui;
};

// UI component fired when `action` is applied (or ignored) on a cell whose
// kind name matches `on` ("*" matches any cell).
struct UiEvent {
  Action action = Action::interact;
  std::string on = "*";
  bool applied = true;
  std::string label;
};

struct GameDescription {
  std::string name = "Kitchen";
  std::string game_description;
  std::string basic_rules;
};

enum class Place : std::uint8_t { cell, held, served };

struct ObjectState {
  std::string id;
  Place place = Place::cell;
  Cell cell;
  std::string state;

  bool operator==(const ObjectState&) const = default;
};

struct GameState {
  Cell agent;
  std::optional<std::string> inventory;
  std::vector<ObjectState> objects;  // config declaration order
  std::uint32_t progress = 0;        // bit i: stage i paid; bit 31: quest paid
  std::int64_t tick = 0;

  bool operator==(const GameState&) const = default;

  const ObjectState* find(std::string_view id) const {
    for (const auto& o : objects) {
      if (o.id == id) return &o;
    }
    return nullptr;
  }
  ObjectState* find(std::string_view id) {
    for (auto& o : objects) {
      if (o.id == id) return &o;
    }
    return nullptr;
  }
  const ObjectState* object_on(Cell c) const {
    for (const auto& o : objects) {
      if (o.place == Place::cell && o.cell == c) return &o;
    }
    return nullptr;
  }
};

inline constexpr std::uint32_t kQuestBit = 1u << 31;

struct EventRecord {
  std::int64_t tick = 0;
  Action action = Action::move_up;
  std::vector<std::string> objects;
  std::string scene;
  std::vector<std::string> ui;
  std::vector<std::string> bug_ids;
  double dt = 1.0;

  bool operator==(const EventRecord&) const = default;
};

struct StepOutcome {
  GameState next_state;
  double reward = 0.0;
  EventRecord event;
  std::vector<std::string> triggered_bugs;
  bool goal_reached = false;

  bool operator==(const StepOutcome&) const = default;
};

}  // namespace gamereg
