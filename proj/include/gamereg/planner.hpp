#pragma once

// Scripted task planner. Stands in for the language model when authoring
// mock seed scripts: it derives the ingredients a goal needs, chains the
// processing rules for each one and walks between cells by breadth-first
// search. Randomness only picks among equivalent choices (ingredient order,
// station copy, shortest route, optional detour).

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gamereg/game_env.hpp"
#include "gamereg/rng.hpp"
#include "gamereg/seed_provider.hpp"

namespace gamereg {

struct PlannerOptions {
  bool shuffle_ingredients = true;
  double detour_probability = 0.0;  // chance to visit a random cell before each leg
};

namespace detail {

inline std::vector<Action> route(const GameConfig& cfg, Cell from, Cell to, Rng* rng) {
  if (from == to) return {};
  std::vector<Action> moves = {Action::move_up, Action::move_down, Action::move_left, Action::move_right};
  std::map<Cell, std::pair<Cell, Action>> parent;
  std::deque<Cell> frontier{from};
  parent[from] = {from, Action::move_up};
  while (!frontier.empty()) {
    const Cell cur = frontier.front();
    frontier.pop_front();
    if (cur == to) break;
    if (rng != nullptr) shuffle(moves, *rng);
    for (auto m : moves) {
      Cell nxt = cur;
      if (m == Action::move_up) --nxt.row;
      if (m == Action::move_down) ++nxt.row;
      if (m == Action::move_left) --nxt.col;
      if (m == Action::move_right) ++nxt.col;
      if (!cfg.in_bounds(nxt) || cfg.kind_at(nxt) == CellKind::wall || parent.count(nxt)) continue;
      parent[nxt] = {cur, m};
      frontier.push_back(nxt);
    }
  }
  if (!parent.count(to)) throw Error("planner: cell unreachable");
  std::vector<Action> path;
  for (Cell c = to; c != from; c = parent[c].first) path.push_back(parent[c].second);
  std::reverse(path.begin(), path.end());
  return path;
}

// Shortest chain of processing rules taking `kind` from `from` to any state
// accepted by `accept`.
template <typename Accept>
std::optional<std::vector<const ProcessingRule*>> rule_chain(const GameConfig& cfg, const std::string& kind,
                                                             const std::string& from, Accept accept) {
  std::map<std::string, std::pair<std::string, const ProcessingRule*>> parent;
  std::deque<std::string> frontier{from};
  parent[from] = {from, nullptr};
  while (!frontier.empty()) {
    const auto cur = frontier.front();
    frontier.pop_front();
    if (accept(cur)) {
      std::vector<const ProcessingRule*> chain;
      for (auto s = cur; parent[s].second != nullptr; s = parent[s].first) chain.push_back(parent[s].second);
      std::reverse(chain.begin(), chain.end());
      return chain;
    }
    for (const auto& r : cfg.rules) {
      if (r.kind == kind && r.from == cur && !parent.count(r.to)) {
        parent[r.to] = {cur, &r};
        frontier.push_back(r.to);
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

inline SeedTrajectory plan_task(const GameConfig& cfg, const TaskSpec& task, Rng& rng,
                                const PlannerOptions& options = {}) {
  struct Need {
    std::string object;
    std::optional<std::string> state;
    bool serve = false;
  };
  std::vector<Need> needs;
  auto need_for = [&](const std::string& id) -> Need& {
    for (auto& n : needs) {
      if (n.object == id) return n;
    }
    needs.push_back({id, std::nullopt, false});
    return needs.back();
  };
  for (const auto& c : task.goal) {
    if (!c.object || c.negate) continue;
    auto& n = need_for(*c.object);
    if (c.state) n.state = c.state;
    if (c.served && *c.served) n.serve = true;
  }
  if (options.shuffle_ingredients) shuffle(needs, rng);

  GameState state = reset(cfg, task);
  SeedTrajectory plan;
  auto emit = [&](Action a, const std::string& why) {
    plan.steps.push_back({static_cast<int>(plan.steps.size()) + 1, why, a});
    state = step(state, a, cfg, task).next_state;
  };
  auto walk = [&](Cell target, const std::string& why) {
    if (options.detour_probability > 0.0 && uniform01(rng) < options.detour_probability) {
      std::vector<Cell> open;
      for (int r = 0; r < cfg.rows(); ++r) {
        for (int c = 0; c < cfg.cols(); ++c) {
          if (cfg.kind_at({r, c}) != CellKind::wall) open.push_back({r, c});
        }
      }
      const Cell via = open[pick_index(rng, open.size())];
      for (auto a : detail::route(cfg, state.agent, via, &rng)) emit(a, "look around on the way");
    }
    for (auto a : detail::route(cfg, state.agent, target, &rng)) emit(a, why);
  };

  for (const auto& n : needs) {
    const auto* spec = cfg.object(n.object);
    const auto* os = state.find(n.object);
    if (spec == nullptr || os == nullptr || os->place != Place::cell) throw Error("planner: object unavailable");
    const auto chain = detail::rule_chain(cfg, spec->kind, os->state, [&](const std::string& s) {
      if (n.state) return s == *n.state;
      if (n.serve) return std::find(spec->servable.begin(), spec->servable.end(), s) != spec->servable.end();
      return true;
    });
    if (!chain) throw Error("planner: no processing chain for " + n.object);

    plan.key_steps.push_back("fetch the " + n.object);
    walk(os->cell, "walk to the " + n.object);
    emit(Action::pickup, "pick up the " + n.object);
    for (const auto* rule : *chain) {
      std::vector<Cell> free_cells;
      for (auto cell : cfg.cells_of_kind(rule->station)) {
        if (state.object_on(cell) == nullptr) free_cells.push_back(cell);
      }
      if (free_cells.empty()) throw Error("planner: no free " + rule->station);
      const Cell station = free_cells[pick_index(rng, free_cells.size())];
      plan.key_steps.push_back("process the " + n.object + " into " + rule->to + " at the " + rule->station);
      walk(station, "carry the " + n.object + " to the " + rule->station);
      emit(Action::drop, "place the " + n.object + " on the " + rule->station);
      emit(Action::interact, "work the " + rule->station + " until the " + n.object + " is " + rule->to);
      emit(Action::pickup, "take the " + rule->to + " " + n.object);
    }
    if (n.serve) {
      const auto windows = cfg.cells_of_kind("serving");
      if (windows.empty()) throw Error("planner: no serving window");
      plan.key_steps.push_back("serve the " + n.object);
      walk(windows[pick_index(rng, windows.size())], "bring the " + n.object + " to the pass");
      emit(Action::drop, "serve the " + n.object);
    } else {
      const auto counters = cfg.cells_of_kind("counter");
      std::vector<Cell> free_cells;
      for (auto cell : counters) {
        if (state.object_on(cell) == nullptr) free_cells.push_back(cell);
      }
      if (!free_cells.empty()) {
        walk(free_cells[pick_index(rng, free_cells.size())], "set the " + n.object + " aside");
        emit(Action::drop, "put down the " + n.object);
      }
    }
  }
  if (plan.steps.empty()) throw Error("planner: empty plan");
  std::string summary = "Handle ";
  for (std::size_t i = 0; i < needs.size(); ++i) summary += (i ? ", then " : "") + needs[i].object;
  plan.summary = summary + " for " + task.task_id + " in " + std::to_string(plan.steps.size()) + " steps.";
  return plan;
}

}  // namespace gamereg
