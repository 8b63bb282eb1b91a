#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "gamereg/exploration.hpp"
#include "gamereg/runner.hpp"
#include "gamereg/transition_graph.hpp"
#include "test_support.hpp"

using namespace gamereg;
using gamereg::testing::data_path;
using gamereg::testing::fixture;
using gamereg::testing::line_config;
using gamereg::testing::line_solution;

namespace {

TestCase case_of(const std::string& id, std::vector<Action> actions, const std::string& task = "serve_tomato") {
  TestCase tc;
  tc.case_id = id;
  tc.task_id = task;
  tc.actions = std::move(actions);
  return tc;
}

std::vector<TestCase> fixture_cases(const std::string& version, const std::string& task_id, int budget = 2000) {
  const auto& cfg = fixture(version);
  const auto& task = cfg.task(task_id);
  ProviderConfig provider;
  provider.mock_script_path = data_path("mock/" + version + "_seeds.jsonl").string();
  const auto prior = behavior_clone(generate_seeds(cfg, task, provider).seeds, cfg, task);
  AgentConfig agent;
  agent.task_step_budget = budget;
  TransitionGraph g(task_id, cfg.version_id, cfg.actions);
  ingest(explore(cfg, task, prior, agent), g);
  return derive_test_cases(enumerate_paths(g, PathLimits{}), g);
}

RunResult result(const std::string& id, int rep, std::vector<std::string> bugs, std::vector<StateHash> visited,
                 CaseStatus status = CaseStatus::valid, int steps = 1) {
  RunResult r;
  r.case_id = id;
  r.repetition = rep;
  r.triggered_bugs = std::move(bugs);
  r.visited = std::move(visited);
  r.status = status;
  r.steps = steps;
  r.reward = 10.0 * steps;
  r.duration = 0.5 * steps;
  r.exec_time = r.duration;
  r.success = status == CaseStatus::valid;
  return r;
}

// Recount of one repetition written directly from the column definitions.
std::array<double, 8> recount(const std::vector<RunResult>& group) {
  std::set<std::string> bugs;
  std::set<StateHash> states;
  double bug_count = 0, reward = 0, valid = 0, duration = 0, steps = 0;
  for (const auto& r : group) {
    for (const auto& b : r.triggered_bugs) {
      bug_count += 1;
      bugs.insert(b);
    }
    for (auto h : r.visited) states.insert(h);
    reward += r.reward;
    valid += r.status == CaseStatus::valid ? 1 : 0;
    duration += r.duration;
    steps += r.steps;
  }
  const double n = static_cast<double>(group.size());
  return {n,
          bug_count,
          static_cast<double>(bugs.size()),
          static_cast<double>(states.size()),
          n > 0 ? reward / n : 0.0,
          n > 0 ? valid / n : 0.0,
          duration,
          steps};
}

}  // namespace

TEST(Execute, SolutionIsValidOnItsOwnVersion) {
  const auto cfg = line_config();
  const auto r = execute(case_of("c1", line_solution()), cfg, TimingMode::simulated);
  EXPECT_EQ(r.status, CaseStatus::valid);
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.steps, 9);
  EXPECT_EQ(r.visited.size(), 10u);
  EXPECT_NEAR(r.reward, 11000.0 - 0.9, 1e-9);
  EXPECT_DOUBLE_EQ(r.duration, r.exec_time);
}

TEST(Execute, BugOnPathIsReported) {
  const auto cfg = line_config();
  const auto r = execute(case_of("c1", line_solution()), cfg);
  EXPECT_EQ(r.triggered_bugs, std::vector<std::string>{"tomato_on_board"});
}

TEST(Execute, TruncatedPathIsObsolete) {
  const auto cfg = line_config();
  auto actions = line_solution();
  actions.pop_back();
  const auto r = execute(case_of("c1", actions), cfg);
  EXPECT_EQ(r.status, CaseStatus::obsolete);
  EXPECT_FALSE(r.success);
}

TEST(Execute, StopsAtGoalAndAtCap) {
  const auto cfg = line_config();
  auto actions = line_solution();
  actions.push_back(Action::move_left);
  EXPECT_EQ(execute(case_of("c1", actions), cfg).steps, 9);
  const auto capped = execute(case_of("c1", line_solution()), cfg, cfg.task("serve_tomato"), TimingMode::simulated, 3);
  EXPECT_EQ(capped.steps, 3);
  EXPECT_EQ(capped.status, CaseStatus::obsolete);
}

TEST(Execute, CasesFromOwnVersionReplayValid) {
  const auto& cfg = fixture("v1");
  const auto cases = fixture_cases("v1", "make_salad");
  ASSERT_FALSE(cases.empty());
  for (const auto& tc : cases) {
    const auto r = execute(tc, cfg, TimingMode::simulated);
    EXPECT_EQ(r.status, CaseStatus::valid) << tc.case_id;
    EXPECT_EQ(r.visited, tc.states) << tc.case_id;
  }
}

TEST(Execute, RawCheeseCaseIsObsoleteAfterSlicingChange) {
  const auto cases = fixture_cases("v1", "serve_cheese");
  ASSERT_FALSE(cases.empty());
  const auto& v1 = fixture("v1");
  const auto& v2 = fixture("v2");
  for (const auto& tc : cases) {
    EXPECT_EQ(execute(tc, v1, TimingMode::simulated).status, CaseStatus::valid);
    EXPECT_EQ(execute(tc, v2, TimingMode::simulated).status, CaseStatus::obsolete) << tc.case_id;
  }
}

TEST(Execute, ResultJsonRoundTrip) {
  const auto cfg = line_config();
  const auto r = execute(case_of("c1", line_solution()), cfg, TimingMode::simulated);
  EXPECT_EQ(result_from_json(nlohmann::json::parse(result_to_json(r).dump())), r);
  auto bad = nlohmann::json::parse(result_to_json(r).dump());
  bad["status"] = "broken";
  EXPECT_THROW(result_from_json(bad), Error);
}

TEST(EpisodeResult, MatchesReplayOfSameActions) {
  const auto cfg = line_config();
  const auto& task = cfg.task("serve_tomato");
  Trajectory t{task.task_id, {}, 0.0, false};
  auto s = reset(cfg, task);
  for (auto a : line_solution()) {
    auto out = step(s, a, cfg, task);
    t.total_reward += out.reward;
    t.success = out.goal_reached;
    auto next = out.next_state;
    t.transitions.push_back({s, a, std::move(out), 0.0, 0.0});
    s = std::move(next);
  }
  const auto ep = episode_result(t, "ep", 2);
  const auto ex = execute(case_of("ep", line_solution()), cfg, TimingMode::simulated);
  EXPECT_EQ(ep.repetition, 2);
  EXPECT_EQ(ep.visited, ex.visited);
  EXPECT_EQ(ep.triggered_bugs, ex.triggered_bugs);
  EXPECT_EQ(ep.steps, ex.steps);
  EXPECT_DOUBLE_EQ(ep.reward, ex.reward);
  EXPECT_EQ(ep.status, ex.status);
}

TEST(Maintain, AllValidFlagsNothing) {
  std::vector<TestCase> cases;
  std::vector<RunResult> results;
  for (int i = 0; i < 10; ++i) {
    cases.push_back(case_of("c" + std::to_string(i), {}));
    results.push_back(result(cases.back().case_id, 0, {}, {1}));
  }
  auto repo = Repository::from_cases(cases);
  maintain(repo, results);
  EXPECT_EQ(repo.flagged(), 0u);
  EXPECT_EQ(repo.active().size(), 10u);
}

TEST(Maintain, ObsoleteCasesAreFlaggedAndExcluded) {
  std::vector<TestCase> cases;
  std::vector<RunResult> results;
  for (int i = 0; i < 10; ++i) {
    const auto id = "c" + std::to_string(i);
    cases.push_back(case_of(id, {}));
    results.push_back(result(id, 0, i == 4 ? std::vector<std::string>{"b1"} : std::vector<std::string>{}, {1},
                             i % 3 == 0 && i > 0 ? CaseStatus::obsolete : CaseStatus::valid, 3));
  }
  auto repo = Repository::from_cases(cases);
  maintain(repo, results);
  EXPECT_EQ(repo.flagged(), 3u);
  std::set<std::string> active;
  for (const auto& tc : repo.active()) active.insert(tc.case_id);
  EXPECT_EQ(active.size(), 7u);
  for (const char* id : {"c3", "c6", "c9"}) EXPECT_EQ(active.count(id), 0u) << id;
  int refreshed = 0;
  for (const auto& e : repo.entries) {
    EXPECT_EQ(e.runs, 1);
    if (e.last_exec_time) ++refreshed;
  }
  EXPECT_EQ(refreshed, 7);
  EXPECT_EQ(repo.find("c4")->bug_history, std::vector<std::string>{"b1"});
  EXPECT_DOUBLE_EQ(repo.find("c4")->tc.exec_time, 1.5);
}

TEST(Maintain, UnknownCaseIsRejectedWithoutSideEffects) {
  auto repo = Repository::from_cases({case_of("a", {})});
  const auto before = repo;
  EXPECT_THROW(maintain(repo, {result("a", 0, {}, {1}), result("zzz", 0, {}, {1})}), Error);
  EXPECT_EQ(repo, before);
}

TEST(Maintain, RepositoryJsonRoundTrip) {
  auto repo = Repository::from_cases({case_of("a", {Action::pickup}), case_of("b", {Action::drop})});
  maintain(repo, {result("a", 0, {"b2"}, {1}), result("b", 0, {}, {1}, CaseStatus::obsolete)});
  const auto text = repository_to_json(repo).dump();
  EXPECT_EQ(repository_from_json(nlohmann::json::parse(text)), repo);
}

TEST(Metrics, RepeatedBugCountsOnceAsUnique) {
  const auto rep = aggregate_metrics({result("a", 0, {"b1"}, {1}), result("b", 0, {"b1"}, {2})}, 1);
  EXPECT_DOUBLE_EQ(rep.mean.bug_count, 2.0);
  EXPECT_DOUBLE_EQ(rep.mean.unique_bugs, 1.0);
}

TEST(Metrics, DisjointStatesAdd) {
  const auto rep = aggregate_metrics({result("a", 0, {}, {1, 2, 3}), result("b", 0, {}, {4, 5, 6, 7})}, 1);
  EXPECT_DOUBLE_EQ(rep.mean.unique_states, 7.0);
}

TEST(Metrics, MatchesRecountOracle) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> small(0, 5);
  for (int trial = 0; trial < 20; ++trial) {
    const int reps = 1 + trial % 4;
    std::vector<RunResult> results;
    std::vector<std::vector<RunResult>> groups(static_cast<std::size_t>(reps));
    for (int i = 0; i < 25; ++i) {
      std::vector<std::string> bugs;
      for (int k = small(rng); k > 3; --k) bugs.push_back("b" + std::to_string(small(rng)));
      std::vector<StateHash> visited;
      for (int k = 0; k <= small(rng); ++k) visited.push_back(static_cast<StateHash>(small(rng) * 7 + k));
      const int rep = i % reps;
      results.push_back(result("c" + std::to_string(i), rep, bugs, visited,
                               small(rng) == 0 ? CaseStatus::obsolete : CaseStatus::valid, 1 + small(rng)));
      groups[static_cast<std::size_t>(rep)].push_back(results.back());
    }
    const auto report = aggregate_metrics(results, reps);
    ASSERT_EQ(report.per_repetition.size(), static_cast<std::size_t>(reps));
    std::array<double, 8> mean{};
    for (int r = 0; r < reps; ++r) {
      const auto want = recount(groups[static_cast<std::size_t>(r)]);
      const auto got = metric_values(report.per_repetition[static_cast<std::size_t>(r)]);
      for (std::size_t k = 0; k < 8; ++k) {
        EXPECT_NEAR(got[k], want[k], 1e-12) << kMetricColumns[k];
        mean[k] += want[k] / reps;
      }
      EXPECT_LE(got[2], got[1]);
    }
    const auto got_mean = metric_values(report.mean);
    const auto got_sd = metric_values(report.stddev);
    for (std::size_t k = 0; k < 8; ++k) {
      EXPECT_NEAR(got_mean[k], mean[k], 1e-9);
      double ss = 0;
      for (int r = 0; r < reps; ++r) {
        const double d = recount(groups[static_cast<std::size_t>(r)])[k] - mean[k];
        ss += d * d;
      }
      EXPECT_NEAR(got_sd[k], reps > 1 ? std::sqrt(ss / (reps - 1)) : 0.0, 1e-9);
    }
  }
}

TEST(Metrics, RejectsBadInput) {
  EXPECT_THROW(aggregate_metrics({}, 1), Error);
  EXPECT_THROW(aggregate_metrics({result("a", 0, {}, {1})}, 0), Error);
  EXPECT_THROW(aggregate_metrics({result("a", 3, {}, {1})}, 2), Error);
}

TEST(Report, JsonRoundTripIsByteStable) {
  auto rep = aggregate_metrics({result("a", 0, {"b1"}, {1, 2}), result("b", 1, {}, {3}, CaseStatus::obsolete)}, 2);
  rep.method = "pipeline";
  rep.transition = "v1->v2";
  rep.proportion = 0.5;
  const auto text = report_to_json(rep).dump();
  const auto back = report_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back, rep);
  EXPECT_EQ(report_to_json(back).dump(), text);
}

TEST(Report, TableHasEightMetricColumns) {
  auto rep = aggregate_metrics({result("a", 0, {"b1"}, {1, 2})}, 1);
  rep.method = "pipeline";
  rep.transition = "v1->v2";
  rep.proportion = 0.3;
  auto random = rep;
  random.method = "random";
  random.proportion.reset();
  const auto table = render_table({rep, random});
  EXPECT_NE(table.find("== v1->v2 =="), std::string::npos);
  EXPECT_NE(table.find("pipeline 30%"), std::string::npos);
  for (const char* col : kMetricColumns) EXPECT_NE(table.find(col), std::string::npos) << col;
  std::istringstream lines(table);
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  std::getline(lines, line);
  int cells = 0;
  for (std::size_t at = 0; (at = line.find("(±", at)) != std::string::npos; ++at) ++cells;
  EXPECT_EQ(cells, 8);
  EXPECT_EQ(format_cell(1.26, 0.04), "1.3 (±0.0)");
}
