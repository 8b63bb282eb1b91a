#pragma once

// Test execution on a game version, repository maintenance and metric
// aggregation across repetitions.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "gamereg/error.hpp"
#include "gamereg/exploration.hpp"
#include "gamereg/game_env.hpp"
#include "gamereg/test_case.hpp"

namespace gamereg {

enum class CaseStatus { valid, obsolete };

inline std::string_view to_string(CaseStatus s) { return s == CaseStatus::valid ? "valid" : "obsolete"; }

// wall: seconds of wall-clock spent in the replay loop. simulated: sum of
// the game's per-action times, which makes reports reproducible.
enum class TimingMode { wall, simulated };

struct RunResult {
  std::string case_id;
  std::string task_id;
  int repetition = 0;
  CaseStatus status = CaseStatus::obsolete;
  std::vector<std::string> triggered_bugs;  // every activation, in order
  std::vector<StateHash> visited;           // s0 first
  int steps = 0;
  double reward = 0.0;
  double duration = 0.0;
  double exec_time = 0.0;  // simulated time-units
  bool success = false;

  bool operator==(const RunResult&) const = default;
};

inline RunResult execute(const TestCase& tc, const GameConfig& cfg, const TaskSpec& task,
                         TimingMode timing = TimingMode::wall, int episode_cap = 100) {
  const auto start = std::chrono::steady_clock::now();
  RunResult r;
  r.case_id = tc.case_id;
  r.task_id = task.task_id;
  GameState s = reset(cfg, task);
  r.visited.push_back(hash_state(s));
  bool goal = goal_reached(s, task, cfg);
  for (std::size_t i = 0; i < tc.actions.size() && !goal && r.steps < episode_cap; ++i) {
    auto out = step(s, tc.actions[i], cfg, task);
    r.triggered_bugs.insert(r.triggered_bugs.end(), out.triggered_bugs.begin(), out.triggered_bugs.end());
    r.reward += out.reward;
    r.exec_time += out.event.dt;
    ++r.steps;
    goal = out.goal_reached;
    s = std::move(out.next_state);
    r.visited.push_back(hash_state(s));
  }
  r.success = goal;
  r.status = goal ? CaseStatus::valid : CaseStatus::obsolete;
  if (timing == TimingMode::wall) {
    r.duration = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  } else {
    r.duration = r.exec_time;
  }
  return r;
}

inline RunResult execute(const TestCase& tc, const GameConfig& cfg, TimingMode timing = TimingMode::wall) {
  const auto& task = cfg.task(tc.task_id);
  return execute(tc, cfg, task, timing, task.max_episode_steps);
}

// One exploration episode viewed as an executed test.
inline RunResult episode_result(const Trajectory& t, std::string id, int repetition) {
  RunResult r;
  r.case_id = std::move(id);
  r.task_id = t.task_id;
  r.repetition = repetition;
  if (!t.transitions.empty()) r.visited.push_back(hash_state(t.transitions.front().state));
  for (const auto& tr : t.transitions) {
    r.triggered_bugs.insert(r.triggered_bugs.end(), tr.outcome.triggered_bugs.begin(), tr.outcome.triggered_bugs.end());
    r.visited.push_back(hash_state(tr.outcome.next_state));
    r.exec_time += tr.outcome.event.dt;
  }
  r.steps = static_cast<int>(t.steps());
  r.reward = t.total_reward;
  r.duration = r.exec_time;
  r.success = t.success;
  r.status = t.success ? CaseStatus::valid : CaseStatus::obsolete;
  return r;
}

inline nlohmann::ordered_json result_to_json(const RunResult& r) {
  std::vector<std::string> visited;
  for (auto h : r.visited) visited.push_back(hash_hex(h));
  return {{"case_id", r.case_id},   {"task_id", r.task_id},   {"repetition", r.repetition},
          {"status", std::string(to_string(r.status))},         {"triggered_bugs", r.triggered_bugs},
          {"visited", visited},     {"steps", r.steps},       {"reward", r.reward},
          {"duration", r.duration}, {"exec_time", r.exec_time}, {"success", r.success}};
}

inline RunResult result_from_json(const nlohmann::json& j) {
  RunResult r;
  r.case_id = j.at("case_id").get<std::string>();
  r.task_id = j.at("task_id").get<std::string>();
  r.repetition = j.at("repetition").get<int>();
  const auto status = j.at("status").get<std::string>();
  if (status != "valid" && status != "obsolete") throw Error("unknown case status " + status);
  r.status = status == "valid" ? CaseStatus::valid : CaseStatus::obsolete;
  r.triggered_bugs = j.at("triggered_bugs").get<std::vector<std::string>>();
  for (const auto& h : j.at("visited")) r.visited.push_back(parse_hash_hex(h.get<std::string>()));
  r.steps = j.at("steps").get<int>();
  r.reward = j.at("reward").get<double>();
  r.duration = j.at("duration").get<double>();
  r.exec_time = j.at("exec_time").get<double>();
  r.success = j.at("success").get<bool>();
  return r;
}

// --- repository ---------------------------------------------------------------

struct RepoEntry {
  TestCase tc;
  bool obsolete = false;
  int runs = 0;
  std::vector<std::string> bug_history;
  std::optional<double> last_exec_time;

  bool operator==(const RepoEntry&) const = default;
};

struct Repository {
  std::vector<RepoEntry> entries;

  static Repository from_cases(const std::vector<TestCase>& cases) {
    Repository r;
    for (const auto& c : cases) r.entries.push_back({c, false, 0, {}, std::nullopt});
    return r;
  }

  RepoEntry* find(const std::string& id) {
    for (auto& e : entries) {
      if (e.tc.case_id == id) return &e;
    }
    return nullptr;
  }

  // Cases eligible for selection.
  std::vector<TestCase> active() const {
    std::vector<TestCase> out;
    for (const auto& e : entries) {
      if (!e.obsolete) out.push_back(e.tc);
    }
    return out;
  }

  std::size_t flagged() const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](auto& e) { return e.obsolete; }));
  }

  bool operator==(const Repository&) const = default;
};

inline Repository& maintain(Repository& repo, const std::vector<RunResult>& results) {
  for (const auto& r : results) {
    if (repo.find(r.case_id) == nullptr) throw Error("unknown case_id " + r.case_id);
  }
  for (const auto& r : results) {
    auto* e = repo.find(r.case_id);
    ++e->runs;
    if (r.status == CaseStatus::obsolete) {
      e->obsolete = true;
      continue;
    }
    e->last_exec_time = r.exec_time;
    e->tc.exec_time = r.exec_time;
    e->bug_history.insert(e->bug_history.end(), r.triggered_bugs.begin(), r.triggered_bugs.end());
  }
  return repo;
}

inline nlohmann::ordered_json repository_to_json(const Repository& repo) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : repo.entries) {
    auto j = case_to_json(e.tc);
    j["repository"] = {{"obsolete", e.obsolete},
                       {"runs", e.runs},
                       {"bug_history", e.bug_history},
                       {"last_exec_time", e.last_exec_time ? nlohmann::ordered_json(*e.last_exec_time)
                                                           : nlohmann::ordered_json(nullptr)}};
    arr.push_back(std::move(j));
  }
  return arr;
}

inline Repository repository_from_json(const nlohmann::json& j) {
  Repository repo;
  for (const auto& item : j) {
    RepoEntry e{case_from_json(item), false, 0, {}, std::nullopt};
    if (item.contains("repository")) {
      const auto& m = item["repository"];
      e.obsolete = m.value("obsolete", false);
      e.runs = m.value("runs", 0);
      e.bug_history = m.value("bug_history", std::vector<std::string>{});
      if (m.contains("last_exec_time") && !m["last_exec_time"].is_null()) e.last_exec_time = m["last_exec_time"].get<double>();
    }
    repo.entries.push_back(std::move(e));
  }
  return repo;
}

// --- metrics -----------------------------------------------------------------

struct Metrics {
  double episodes = 0;
  double bug_count = 0;
  double unique_bugs = 0;
  double unique_states = 0;
  double reward = 0;  // mean per episode
  double success_rate = 0;
  double duration = 0;
  double total_steps = 0;

  bool operator==(const Metrics&) const = default;
};

inline constexpr std::array<const char*, 8> kMetricColumns = {
    "Episodes", "Bug Count", "Unique Bugs", "Unique States", "Reward", "Success Rate", "Duration", "Total Steps"};

inline std::array<double, 8> metric_values(const Metrics& m) {
  return {m.episodes, m.bug_count, m.unique_bugs, m.unique_states, m.reward, m.success_rate, m.duration, m.total_steps};
}

inline Metrics metrics_from_values(const std::array<double, 8>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
}

inline Metrics episode_metrics(const std::vector<RunResult>& results) {
  Metrics m;
  std::set<std::string> bugs;
  std::unordered_set<StateHash> states;
  double reward = 0.0;
  double valid = 0.0;
  for (const auto& r : results) {
    m.bug_count += static_cast<double>(r.triggered_bugs.size());
    bugs.insert(r.triggered_bugs.begin(), r.triggered_bugs.end());
    states.insert(r.visited.begin(), r.visited.end());
    reward += r.reward;
    if (r.status == CaseStatus::valid) valid += 1.0;
    m.duration += r.duration;
    m.total_steps += r.steps;
  }
  m.episodes = static_cast<double>(results.size());
  m.unique_bugs = static_cast<double>(bugs.size());
  m.unique_states = static_cast<double>(states.size());
  m.reward = results.empty() ? 0.0 : reward / m.episodes;
  m.success_rate = results.empty() ? 0.0 : valid / m.episodes;
  return m;
}

struct SuiteReport {
  std::string method;
  std::string transition;
  std::optional<double> proportion;
  int repetitions = 0;
  Metrics mean;
  Metrics stddev;                   // sample standard deviation
  std::vector<Metrics> per_repetition;

  bool operator==(const SuiteReport&) const = default;
};

// Groups results by repetition index (0..repetitions-1); empty groups count
// as zero-valued repetitions.
inline SuiteReport aggregate_metrics(const std::vector<RunResult>& results, int repetitions) {
  if (results.empty()) throw Error("no results to aggregate");
  if (repetitions < 1) throw Error("repetitions must be at least 1");
  std::vector<std::vector<RunResult>> groups(static_cast<std::size_t>(repetitions));
  for (const auto& r : results) {
    if (r.repetition < 0 || r.repetition >= repetitions) throw Error("repetition index out of range");
    groups[static_cast<std::size_t>(r.repetition)].push_back(r);
  }
  SuiteReport rep;
  rep.repetitions = repetitions;
  std::array<double, 8> sum{};
  for (const auto& g : groups) {
    rep.per_repetition.push_back(episode_metrics(g));
    const auto v = metric_values(rep.per_repetition.back());
    for (std::size_t k = 0; k < 8; ++k) sum[k] += v[k];
  }
  std::array<double, 8> mean{};
  for (std::size_t k = 0; k < 8; ++k) mean[k] = sum[k] / repetitions;
  std::array<double, 8> var{};
  if (repetitions > 1) {
    for (const auto& m : rep.per_repetition) {
      const auto v = metric_values(m);
      for (std::size_t k = 0; k < 8; ++k) var[k] += (v[k] - mean[k]) * (v[k] - mean[k]);
    }
    for (auto& x : var) x = std::sqrt(x / (repetitions - 1));
  }
  rep.mean = metrics_from_values(mean);
  rep.stddev = metrics_from_values(var);
  return rep;
}

inline nlohmann::ordered_json metrics_to_json(const Metrics& m) {
  nlohmann::ordered_json j;
  const auto v = metric_values(m);
  for (std::size_t k = 0; k < 8; ++k) j[kMetricColumns[k]] = v[k];
  return j;
}

inline Metrics metrics_from_json(const nlohmann::json& j) {
  std::array<double, 8> v{};
  for (std::size_t k = 0; k < 8; ++k) v[k] = j.at(kMetricColumns[k]).get<double>();
  return metrics_from_values(v);
}

inline nlohmann::ordered_json report_to_json(const SuiteReport& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["transition"] = r.transition;
  j["proportion"] = r.proportion ? nlohmann::ordered_json(*r.proportion) : nlohmann::ordered_json(nullptr);
  j["repetitions"] = r.repetitions;
  j["mean"] = metrics_to_json(r.mean);
  j["stddev"] = metrics_to_json(r.stddev);
  auto per = nlohmann::ordered_json::array();
  for (const auto& m : r.per_repetition) per.push_back(metrics_to_json(m));
  j["per_repetition"] = std::move(per);
  return j;
}

inline SuiteReport report_from_json(const nlohmann::json& j) {
  SuiteReport r;
  r.method = j.at("method").get<std::string>();
  r.transition = j.at("transition").get<std::string>();
  if (!j.at("proportion").is_null()) r.proportion = j["proportion"].get<double>();
  r.repetitions = j.at("repetitions").get<int>();
  r.mean = metrics_from_json(j.at("mean"));
  r.stddev = metrics_from_json(j.at("stddev"));
  for (const auto& m : j.at("per_repetition")) r.per_repetition.push_back(metrics_from_json(m));
  return r;
}

inline std::string format_cell(double mean, double sd) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f (±%.1f)", mean, sd);
  return buf;
}

inline std::string report_label(const SuiteReport& r) {
  std::string label = r.method;
  if (r.proportion) {
    char buf[16];
    std::snprintf(buf, sizeof buf, " %d%%", static_cast<int>(std::lround(*r.proportion * 100)));
    label += buf;
  }
  return label;
}

// Plain-text table, one block per transition, columns as in kMetricColumns.
inline std::string render_table(const std::vector<SuiteReport>& reports) {
  std::vector<std::string> transitions;
  for (const auto& r : reports) {
    if (std::find(transitions.begin(), transitions.end(), r.transition) == transitions.end()) {
      transitions.push_back(r.transition);
    }
  }
  // Display width of "±" is one column though it is two bytes.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s) w += (c & 0xC0) != 0x80;
    return w;
  };
  auto pad = [&](const std::string& s, std::size_t w) { return s + std::string(w > width(s) ? w - width(s) : 0, ' '); };
  std::string out;
  for (const auto& t : transitions) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"Method"});
    for (auto c : kMetricColumns) rows.back().emplace_back(c);
    for (const auto& r : reports) {
      if (r.transition != t) continue;
      std::vector<std::string> row{report_label(r)};
      const auto m = metric_values(r.mean);
      const auto s = metric_values(r.stddev);
      for (std::size_t k = 0; k < 8; ++k) row.push_back(format_cell(m[k], s[k]));
      rows.push_back(std::move(row));
    }
    std::vector<std::size_t> widths(rows.front().size(), 0);
    for (const auto& row : rows) {
      for (std::size_t k = 0; k < row.size(); ++k) widths[k] = std::max(widths[k], width(row[k]));
    }
    out += t.empty() ? std::string() : "== " + t + " ==\n";
    for (const auto& row : rows) {
      std::string line;
      for (std::size_t k = 0; k < row.size(); ++k) line += (k ? "  " : "") + pad(row[k], widths[k]);
      while (!line.empty() && line.back() == ' ') line.pop_back();
      out += line + "\n";
    }
    out += "\n";
  }
  return out;
}

}  // namespace gamereg
