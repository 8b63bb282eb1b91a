#pragma once

// Trajectory store: JSONL, one trajectory per line, states referenced by
// hash. Full states live in a sidecar dictionary {hash: state}.

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gamereg/exploration.hpp"

namespace gamereg {

inline void save_trajectories(const std::vector<Trajectory>& trajectories, const std::filesystem::path& jsonl_path,
                              const std::filesystem::path& states_path) {
  std::map<std::string, nlohmann::ordered_json> dictionary;
  std::ofstream out(jsonl_path);
  if (!out) throw Error("cannot write " + jsonl_path.string());
  auto remember = [&](const GameState& s) {
    const auto key = hash_hex(hash_state(s));
    if (!dictionary.count(key)) {
      auto j = state_to_json(s);
      j["tick"] = 0;
      dictionary.emplace(key, std::move(j));
    }
    return key;
  };
  for (const auto& t : trajectories) {
    nlohmann::ordered_json line;
    line["task_id"] = t.task_id;
    line["success"] = t.success;
    line["total_reward"] = t.total_reward;
    auto steps = nlohmann::ordered_json::array();
    for (const auto& tr : t.transitions) {
      nlohmann::ordered_json st;
      st["s"] = remember(tr.state);
      st["t"] = tr.state.tick;
      st["a"] = std::string(to_string(tr.action));
      st["s2"] = remember(tr.outcome.next_state);
      st["reward"] = tr.outcome.reward;
      st["goal"] = tr.outcome.goal_reached;
      st["bonus"] = tr.bonus;
      st["discrepancy"] = tr.discrepancy;
      st["event"] = event_to_json(tr.outcome.event);
      steps.push_back(std::move(st));
    }
    line["steps"] = std::move(steps);
    out << line.dump() << '\n';
  }
  nlohmann::ordered_json dict = nlohmann::ordered_json::object();
  for (auto& [k, v] : dictionary) dict[k] = std::move(v);
  std::ofstream states(states_path);
  if (!states) throw Error("cannot write " + states_path.string());
  states << dict.dump(1) << '\n';
}

inline std::vector<Trajectory> load_trajectories(const std::filesystem::path& jsonl_path,
                                                 const std::filesystem::path& states_path) {
  std::ifstream sin(states_path);
  if (!sin) throw Error("cannot read " + states_path.string());
  const auto dict = nlohmann::json::parse(sin);
  auto lookup = [&](const std::string& key, std::int64_t tick) {
    if (!dict.contains(key)) throw Error("state " + key + " missing from dictionary");
    auto s = state_from_json(dict[key]);
    s.tick = tick;
    return s;
  };
  std::ifstream in(jsonl_path);
  if (!in) throw Error("cannot read " + jsonl_path.string());
  std::vector<Trajectory> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    Trajectory t;
    t.task_id = j.at("task_id").get<std::string>();
    t.success = j.at("success").get<bool>();
    t.total_reward = j.at("total_reward").get<double>();
    for (const auto& st : j.at("steps")) {
      Transition tr;
      const auto tick = st.at("t").get<std::int64_t>();
      tr.state = lookup(st.at("s").get<std::string>(), tick);
      const auto a = parse_action(st.at("a").get<std::string>());
      if (!a) throw Error("trajectory store: unknown action");
      tr.action = *a;
      tr.outcome.next_state = lookup(st.at("s2").get<std::string>(), tick + 1);
      tr.outcome.reward = st.at("reward").get<double>();
      tr.outcome.goal_reached = st.at("goal").get<bool>();
      tr.outcome.event = event_from_json(st.at("event"));
      tr.outcome.triggered_bugs = tr.outcome.event.bug_ids;
      tr.bonus = st.at("bonus").get<double>();
      tr.discrepancy = st.at("discrepancy").get<double>();
      t.transitions.push_back(std::move(tr));
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace gamereg
