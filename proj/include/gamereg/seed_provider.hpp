#pragma once

// Seed trajectories from a language-model backend: prompt construction,
// response parsing and the sequential generation loop.

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gamereg/error.hpp"
#include "gamereg/game_config.hpp"
#include "gamereg/llm_backend.hpp"

namespace gamereg {

struct SeedStep {
  int step = 0;
  std::string description;
  Action action = Action::move_up;

  bool operator==(const SeedStep&) const = default;
};

struct SeedTrajectory {
  std::string summary;
  std::vector<std::string> key_steps;
  std::vector<SeedStep> steps;

  bool operator==(const SeedTrajectory&) const = default;

  std::vector<Action> actions() const {
    std::vector<Action> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(s.action);
    return out;
  }
};

struct PastSolution {
  std::string summary;
  std::vector<std::string> key_subtasks;
};

struct SeedPrompt {
  struct Environment {
    std::string name;
    std::string game_description;
    std::string basic_rules;
    std::string current_obs_description;
    std::vector<std::string> available_actions;
  } environment;
  struct Task {
    std::string name;
    std::string task_objective;
    std::string related_rules;
  } task;
  std::vector<PastSolution> past_solutions;
  std::string instructions;
  std::string output_format;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["environment"] = {{"name", environment.name},
                        {"game_description", environment.game_description},
                        {"basic_rules", environment.basic_rules},
                        {"current_obs_description", environment.current_obs_description},
                        {"available_actions", environment.available_actions}};
    j["task"] = {{"name", task.name}, {"task_objective", task.task_objective}, {"related_rules", task.related_rules}};
    auto past = nlohmann::ordered_json::array();
    for (const auto& p : past_solutions) past.push_back({{"summary", p.summary}, {"key_subtasks", p.key_subtasks}});
    j["past_solutions"] = past;
    j["instructions"] = instructions;
    j["output_format"] = output_format;
    return j;
  }
};

enum class BackendKind { mock, http };

struct ProviderConfig {
  BackendKind backend = BackendKind::mock;
  std::string mock_script_path;
  HttpSettings http;
  int seeds_per_task = 20;
  // Upper bound on requests per task; 0 means 2 * seeds_per_task.
  int max_attempts = 0;
};

inline std::unique_ptr<LlmBackend> make_backend(const ProviderConfig& cfg) {
  if (cfg.backend == BackendKind::mock) {
    return std::make_unique<MockBackend>(MockBackend::from_file(cfg.mock_script_path));
  }
  return std::make_unique<HttpBackend>(cfg.http);
}

// Layout description handed to the model: item, station and agent positions.
inline std::string describe_layout(const GameConfig& cfg) {
  std::ostringstream os;
  os << "Kitchen layout (row, col): ";
  bool first = true;
  auto emit = [&](const std::string& what, Cell c) {
    if (!first) os << ", ";
    first = false;
    os << what << " at (" << c.row << "," << c.col << ")";
  };
  for (const auto& o : cfg.objects) emit(o.id + " (" + o.states.front() + ")", o.cell);
  for (int r = 0; r < cfg.rows(); ++r) {
    for (int c = 0; c < cfg.cols(); ++c) {
      const auto kind = cfg.kind_at({r, c});
      if (kind == CellKind::station || kind == CellKind::serving) emit(cfg.kind_name({r, c}), {r, c});
    }
  }
  emit("agent", cfg.start);
  os << ". Walls block movement; every other cell is walkable.";
  return os.str();
}

inline SeedPrompt build_prompt(const GameConfig& cfg, const TaskSpec& task, const std::vector<SeedTrajectory>& past) {
  SeedPrompt p;
  p.environment.name = cfg.description.name;
  p.environment.game_description = cfg.description.game_description;
  p.environment.basic_rules = cfg.description.basic_rules;
  p.environment.current_obs_description = describe_layout(cfg);
  for (auto a : cfg.actions) p.environment.available_actions.emplace_back(to_string(a));
  p.task.name = task.task_id;
  p.task.task_objective = task.objective;
  p.task.related_rules = task.related_rules;
  for (const auto& s : past) p.past_solutions.push_back({s.summary, s.key_steps});
  p.instructions =
      "Propose a plan for the task that differs from every entry in past_solutions. Break the task into "
      "subtasks such as fetching, processing and serving ingredients, and give one atomic action from "
      "available_actions per step. Vary the order of subtasks or the route taken while keeping the plan "
      "executable.";
  p.output_format =
      "A JSON object with: summary (one-paragraph description of the plan); key_steps (list of subtasks); "
      "steps (array of {step, description, action}).";
  return p;
}

namespace detail {

inline std::string strip_code_fence(const std::string& text) {
  const auto start = text.find_first_not_of(" \t\r\n");
  if (start == std::string::npos) return text;
  if (text.compare(start, 3, "```") != 0) return text;
  const auto body = text.find('\n', start);
  const auto end = text.rfind("```");
  if (body == std::string::npos || end <= body) return text;
  return text.substr(body + 1, end - body - 1);
}

}  // namespace detail

inline SeedTrajectory parse_trajectory(const std::string& response,
                                       const std::vector<Action>& alphabet = {Action::move_up, Action::move_down,
                                                                              Action::move_left, Action::move_right,
                                                                              Action::pickup, Action::drop,
                                                                              Action::interact}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::strip_code_fence(response));
  } catch (const nlohmann::json::parse_error&) {
    throw Error("malformed JSON in seed response");
  }
  if (!j.is_object() || !j.contains("steps") || !j["steps"].is_array()) throw Error("seed response lacks steps");
  SeedTrajectory t;
  t.summary = j.value("summary", "");
  if (j.contains("key_steps") && j["key_steps"].is_array()) {
    for (const auto& k : j["key_steps"]) {
      if (k.is_string()) t.key_steps.push_back(k.get<std::string>());
    }
  }
  if (j["steps"].empty()) throw Error("empty steps");
  int previous = 0;
  for (const auto& s : j["steps"]) {
    if (!s.is_object() || !s.contains("step") || !s["step"].is_number_integer() || !s.contains("action") ||
        !s["action"].is_string()) {
      throw Error("malformed step entry");
    }
    SeedStep step;
    step.step = s["step"].get<int>();
    step.description = s.value("description", "");
    const auto name = s["action"].get<std::string>();
    const auto a = parse_action(name);
    if (!a || std::find(alphabet.begin(), alphabet.end(), *a) == alphabet.end()) {
      throw Error("unknown action \"" + name + "\"");
    }
    step.action = *a;
    if (previous == 0 && step.step != 1) throw Error("step indices must start at 1");
    if (step.step <= previous) throw Error("non-increasing step index");
    previous = step.step;
    t.steps.push_back(std::move(step));
  }
  return t;
}

inline nlohmann::ordered_json seed_to_json(const SeedTrajectory& t) {
  nlohmann::ordered_json j;
  j["summary"] = t.summary;
  j["key_steps"] = t.key_steps;
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : t.steps) {
    steps.push_back({{"step", s.step}, {"description", s.description}, {"action", std::string(to_string(s.action))}});
  }
  j["steps"] = steps;
  return j;
}

inline SeedTrajectory seed_from_json(const nlohmann::json& j) { return parse_trajectory(j.dump()); }

struct SeedBatch {
  std::vector<SeedTrajectory> seeds;
  Warnings warnings;
};

// Sequential: each accepted seed joins past_solutions for the next prompt.
// Unparseable responses are skipped with a warning; a transport failure
// or an exhausted mock script ends the loop.
inline SeedBatch generate_seeds(const GameConfig& cfg, const TaskSpec& task, LlmBackend& backend,
                                const ProviderConfig& provider) {
  if (provider.seeds_per_task < 1) throw Error("seeds_per_task must be >= 1");
  const int max_attempts = provider.max_attempts > 0 ? provider.max_attempts : 2 * provider.seeds_per_task;
  SeedBatch batch;
  std::string transport_error;
  for (int attempt = 0;
       attempt < max_attempts && static_cast<int>(batch.seeds.size()) < provider.seeds_per_task; ++attempt) {
    const auto prompt = build_prompt(cfg, task, batch.seeds);
    std::string response;
    try {
      response = backend.complete({"seed", task.task_id, prompt.to_json()});
    } catch (const BackendError& e) {
      transport_error = e.what();
      break;
    }
    try {
      batch.seeds.push_back(parse_trajectory(response, cfg.actions));
    } catch (const Error& e) {
      warn(&batch.warnings, "seed response " + std::to_string(attempt + 1) + " for " + task.task_id +
                                " skipped: " + e.what());
    }
  }
  if (batch.seeds.empty()) {
    throw Error("no valid seeds for task " + task.task_id +
                (transport_error.empty() ? std::string() : " (" + transport_error + ")"));
  }
  return batch;
}

inline SeedBatch generate_seeds(const GameConfig& cfg, const TaskSpec& task, const ProviderConfig& provider) {
  auto backend = make_backend(provider);
  return generate_seeds(cfg, task, *backend, provider);
}

}  // namespace gamereg
