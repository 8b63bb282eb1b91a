#pragma once

// State-action transition graph built from explored trajectories, bounded
// simple-path enumeration from s0 to goal states, and test-case derivation.

#include <algorithm>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gamereg/error.hpp"
#include "gamereg/exploration.hpp"
#include "gamereg/game_env.hpp"
#include "gamereg/test_case.hpp"

namespace gamereg {

struct EdgeMeta {
  double exec_time = 1.0;
  std::set<std::string> objects;
  std::string scene;  // scene of the destination cell
  std::set<std::string> ui;
  long observations = 1;

  bool operator==(const EdgeMeta&) const = default;
};

struct Edge {
  StateHash to = 0;
  EdgeMeta meta;

  bool operator==(const Edge&) const = default;
};

struct CandidatePath {
  std::vector<StateHash> nodes;
  std::vector<Action> actions;
  std::string task_id;

  bool operator==(const CandidatePath&) const = default;
  auto operator<=>(const CandidatePath&) const = default;
};

struct PathLimits {
  int max_depth = 60;
  int max_paths_per_goal = 500;
  int max_total_paths = 5000;

  void check() const {
    if (max_depth <= 0 || max_paths_per_goal <= 0 || max_total_paths <= 0) throw Error("path limits must be positive");
  }
};

class TransitionGraph {
 public:
  using EdgeKey = std::pair<StateHash, Action>;

  TransitionGraph() = default;
  TransitionGraph(std::string task_id, std::string version_id, std::vector<Action> alphabet)
      : task_id_(std::move(task_id)), version_id_(std::move(version_id)), alphabet_(std::move(alphabet)) {}

  const std::string& task_id() const { return task_id_; }
  const std::string& version_id() const { return version_id_; }
  const std::vector<Action>& alphabet() const { return alphabet_; }
  const std::map<StateHash, GameState>& states() const { return states_; }
  const std::map<EdgeKey, Edge>& edges() const { return edges_; }
  const std::set<StateHash>& goal_states() const { return goals_; }
  bool has_s0() const { return has_s0_; }
  StateHash s0() const { return s0_; }

  void set_s0(StateHash h, const GameState& s) {
    s0_ = h;
    has_s0_ = true;
    add_state(h, s);
  }
  void add_state(StateHash h, GameState s) {
    if (states_.count(h)) return;
    s.tick = 0;
    states_.emplace(h, std::move(s));
  }
  void add_goal(StateHash h) { goals_.insert(h); }

  // Inserts or merges one observed transition.
  void observe(StateHash from, Action a, StateHash to, const EventRecord& ev) {
    auto it = edges_.find({from, a});
    if (it == edges_.end()) {
      EdgeMeta meta;
      meta.exec_time = ev.dt;
      meta.objects.insert(ev.objects.begin(), ev.objects.end());
      meta.scene = ev.scene;
      meta.ui.insert(ev.ui.begin(), ev.ui.end());
      meta.observations = 1;
      edges_.emplace(EdgeKey{from, a}, Edge{to, std::move(meta)});
      return;
    }
    if (it->second.to != to) {
      throw Error("nondeterminism detected at state " + hash_hex(from) + " action " + std::string(to_string(a)));
    }
    auto& meta = it->second.meta;
    meta.observations += 1;
    meta.exec_time += (ev.dt - meta.exec_time) / static_cast<double>(meta.observations);
    meta.objects.insert(ev.objects.begin(), ev.objects.end());
    meta.ui.insert(ev.ui.begin(), ev.ui.end());
  }

  const Edge* edge(StateHash from, Action a) const {
    const auto it = edges_.find({from, a});
    return it == edges_.end() ? nullptr : &it->second;
  }

  // Outgoing edges of `from` in alphabet order.
  std::vector<std::pair<Action, const Edge*>> successors(StateHash from) const {
    std::vector<std::pair<Action, const Edge*>> out;
    for (auto a : alphabet_) {
      if (const auto* e = edge(from, a)) out.emplace_back(a, e);
    }
    return out;
  }

  bool operator==(const TransitionGraph&) const = default;

 private:
  std::string task_id_;
  std::string version_id_;
  std::vector<Action> alphabet_;
  std::map<StateHash, GameState> states_;
  std::map<EdgeKey, Edge> edges_;
  std::set<StateHash> goals_;
  StateHash s0_ = 0;
  bool has_s0_ = false;
};

inline TransitionGraph& ingest(const std::vector<Trajectory>& trajectories, TransitionGraph& graph) {
  for (const auto& t : trajectories) {
    if (t.transitions.empty()) continue;
    const auto& first = t.transitions.front().state;
    const StateHash start = hash_state(first);
    if (!graph.has_s0()) {
      graph.set_s0(start, first);
    } else if (start != graph.s0()) {
      throw Error("trajectory does not start at the graph's initial state");
    }
    for (const auto& tr : t.transitions) {
      const StateHash from = hash_state(tr.state);
      const StateHash to = hash_state(tr.outcome.next_state);
      graph.add_state(from, tr.state);
      graph.add_state(to, tr.outcome.next_state);
      graph.observe(from, tr.action, to, tr.outcome.event);
      if (tr.outcome.goal_reached) graph.add_goal(to);
    }
  }
  return graph;
}

namespace detail {

// Edge count of the shortest path from every node to `goal` (self-loops are
// irrelevant to simple paths and skipped).
inline std::unordered_map<StateHash, int> distances_to(const TransitionGraph& g, StateHash goal) {
  std::unordered_map<StateHash, std::vector<StateHash>> reverse;
  for (const auto& [key, e] : g.edges()) {
    if (key.first != e.to) reverse[e.to].push_back(key.first);
  }
  std::unordered_map<StateHash, int> dist{{goal, 0}};
  std::deque<StateHash> frontier{goal};
  while (!frontier.empty()) {
    const auto cur = frontier.front();
    frontier.pop_front();
    const auto it = reverse.find(cur);
    if (it == reverse.end()) continue;
    for (auto prev : it->second) {
      if (dist.emplace(prev, dist[cur] + 1).second) frontier.push_back(prev);
    }
  }
  return dist;
}

struct PathSearch {
  const TransitionGraph& graph;
  StateHash goal;
  const std::unordered_map<StateHash, int>& dist;
  int length = 0;
  std::size_t cap = 0;
  std::vector<CandidatePath>& out;
  std::vector<StateHash> nodes;
  std::vector<Action> actions;
  std::unordered_set<StateHash> on_path;

  void run(StateHash u) {
    if (out.size() >= cap) return;
    const int depth = static_cast<int>(actions.size());
    if (u == goal) {
      if (depth == length) out.push_back({nodes, actions, graph.task_id()});
      return;
    }
    for (const auto& [a, e] : graph.successors(u)) {
      const StateHash v = e->to;
      if (on_path.count(v)) continue;
      const auto d = dist.find(v);
      if (d == dist.end() || depth + 1 + d->second > length) continue;
      nodes.push_back(v);
      actions.push_back(a);
      on_path.insert(v);
      run(v);
      on_path.erase(v);
      actions.pop_back();
      nodes.pop_back();
      if (out.size() >= cap) return;
    }
  }
};

}  // namespace detail

// Depth-first enumeration of simple paths from s0 to each goal state. Goals
// are visited in ascending hash order; for each goal, paths are produced by
// increasing length (iterative deepening up to max_depth) and, within one
// length, in action-alphabet order. Truncation keeps the earliest paths.
inline std::vector<CandidatePath> enumerate_paths(const TransitionGraph& graph, const PathLimits& limits,
                                                  Warnings* warnings = nullptr) {
  limits.check();
  std::vector<CandidatePath> all;
  if (!graph.has_s0() || graph.goal_states().empty()) {
    warn(warnings, "graph " + graph.task_id() + " has no goal state");
    return all;
  }
  for (const StateHash goal : graph.goal_states()) {
    if (static_cast<int>(all.size()) >= limits.max_total_paths) break;
    const auto dist = detail::distances_to(graph, goal);
    const auto start = dist.find(graph.s0());
    if (start == dist.end()) continue;
    std::vector<CandidatePath> found;
    const std::size_t cap = static_cast<std::size_t>(
        std::min(limits.max_paths_per_goal, limits.max_total_paths - static_cast<int>(all.size())));
    for (int length = std::max(1, start->second); length <= limits.max_depth && found.size() < cap; ++length) {
      detail::PathSearch search{graph, goal, dist, length, cap, found, {graph.s0()}, {}, {graph.s0()}};
      search.run(graph.s0());
    }
    all.insert(all.end(), found.begin(), found.end());
  }
  if (all.empty()) warn(warnings, "no goal reachable from s0 in graph " + graph.task_id());
  return all;
}

inline TestCase to_test_case(const CandidatePath& path, const TransitionGraph& graph, std::string case_id) {
  if (path.nodes.size() != path.actions.size() + 1 || path.nodes.empty()) throw Error("malformed candidate path");
  TestCase tc;
  tc.case_id = std::move(case_id);
  tc.task_id = path.task_id.empty() ? graph.task_id() : path.task_id;
  tc.version_id = graph.version_id();
  tc.actions = path.actions;
  tc.states = path.nodes;
  for (std::size_t i = 0; i < path.actions.size(); ++i) {
    const auto* e = graph.edge(path.nodes[i], path.actions[i]);
    if (e == nullptr || e->to != path.nodes[i + 1]) {
      throw Error("dangling edge at position " + std::to_string(i) + " of " + tc.case_id);
    }
    tc.metadata.objects.insert(e->meta.objects.begin(), e->meta.objects.end());
    if (!e->meta.scene.empty()) tc.metadata.scenes.insert(e->meta.scene);
    tc.metadata.ui.insert(e->meta.ui.begin(), e->meta.ui.end());
    tc.exec_time += e->meta.exec_time;
  }
  return tc;
}

inline std::string make_case_id(const std::string& task_id, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05zu", index);
  return task_id + "-" + buf;
}

inline std::vector<TestCase> derive_test_cases(const std::vector<CandidatePath>& paths, const TransitionGraph& graph) {
  std::vector<TestCase> out;
  out.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    out.push_back(to_test_case(paths[i], graph, make_case_id(graph.task_id(), i)));
  }
  return out;
}

// --- graph store ------------------------------------------------------------

inline nlohmann::ordered_json graph_to_json(const TransitionGraph& g) {
  nlohmann::ordered_json j;
  j["task_id"] = g.task_id();
  j["version_id"] = g.version_id();
  std::vector<std::string> alphabet;
  for (auto a : g.alphabet()) alphabet.emplace_back(to_string(a));
  j["alphabet"] = alphabet;
  j["s0"] = g.has_s0() ? nlohmann::ordered_json(hash_hex(g.s0())) : nlohmann::ordered_json(nullptr);
  std::vector<std::string> goals;
  for (auto h : g.goal_states()) goals.push_back(hash_hex(h));
  j["goals"] = goals;
  auto states = nlohmann::ordered_json::object();
  for (const auto& [h, s] : g.states()) states[hash_hex(h)] = state_to_json(s);
  j["states"] = std::move(states);
  auto edges = nlohmann::ordered_json::array();
  for (const auto& [key, e] : g.edges()) {
    edges.push_back({{"from", hash_hex(key.first)},
                     {"action", std::string(to_string(key.second))},
                     {"to", hash_hex(e.to)},
                     {"exec_time", e.meta.exec_time},
                     {"objects", e.meta.objects},
                     {"scene", e.meta.scene},
                     {"ui", e.meta.ui},
                     {"observations", e.meta.observations}});
  }
  j["edges"] = std::move(edges);
  return j;
}

inline TransitionGraph graph_from_json(const nlohmann::json& j) {
  std::vector<Action> alphabet;
  for (const auto& a : j.at("alphabet")) {
    const auto parsed = parse_action(a.get<std::string>());
    if (!parsed) throw Error("graph store: unknown action");
    alphabet.push_back(*parsed);
  }
  TransitionGraph g(j.at("task_id").get<std::string>(), j.at("version_id").get<std::string>(), alphabet);
  std::map<StateHash, GameState> states;
  for (const auto& [k, v] : j.at("states").items()) states.emplace(parse_hash_hex(k), state_from_json(v));
  if (!j.at("s0").is_null()) {
    const auto s0 = parse_hash_hex(j["s0"].get<std::string>());
    if (!states.count(s0)) throw Error("graph store: s0 missing from states");
    g.set_s0(s0, states.at(s0));
  }
  for (auto& [h, s] : states) g.add_state(h, s);
  for (const auto& goal : j.at("goals")) g.add_goal(parse_hash_hex(goal.get<std::string>()));
  for (const auto& e : j.at("edges")) {
    const auto from = parse_hash_hex(e.at("from").get<std::string>());
    const auto to = parse_hash_hex(e.at("to").get<std::string>());
    if (!states.count(from) || !states.count(to)) throw Error("graph store: edge endpoint missing from states");
    const auto a = parse_action(e.at("action").get<std::string>());
    if (!a) throw Error("graph store: unknown action");
    EventRecord ev;
    ev.dt = e.at("exec_time").get<double>();
    ev.objects = e.at("objects").get<std::vector<std::string>>();
    ev.scene = e.at("scene").get<std::string>();
    ev.ui = e.at("ui").get<std::vector<std::string>>();
    g.observe(from, *a, to, ev);
    const long obs = e.at("observations").get<long>();
    for (long i = 1; i < obs; ++i) g.observe(from, *a, to, ev);
  }
  return g;
}

}  // namespace gamereg
