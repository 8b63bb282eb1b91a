#include <gtest/gtest.h>

#include "gamereg/exploration.hpp"
#include "gamereg/transition_graph.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace gamereg;
using gamereg::testing::data_path;
using gamereg::testing::fixture;
using gamereg::testing::line_config;
using gamereg::testing::line_solution;

namespace {

Trajectory rollout(const GameConfig& cfg, const TaskSpec& task, const std::vector<Action>& actions) {
  Trajectory t{task.task_id, {}, 0.0, false};
  auto s = reset(cfg, task);
  for (auto a : actions) {
    auto out = step(s, a, cfg, task);
    t.total_reward += out.reward;
    t.success = out.goal_reached;
    auto next = out.next_state;
    t.transitions.push_back({s, a, std::move(out), 0.0, 0.0});
    s = std::move(next);
  }
  return t;
}

std::vector<Action> alphabet() {
  std::vector<Action> out;
  for (std::size_t i = 0; i < kActionKinds; ++i) out.push_back(static_cast<Action>(i));
  return out;
}

GameState node_state(int i) {
  GameState s;
  s.agent = {i, i};
  return s;
}

struct EdgeSpec {
  int from;
  Action a;
  int to;
  std::vector<std::string> objects = {};
  std::string scene = "";
};

TransitionGraph synthetic(const std::vector<EdgeSpec>& edges, const std::vector<int>& goals) {
  TransitionGraph g("synthetic", "vtest", alphabet());
  g.set_s0(1, node_state(1));
  for (const auto& e : edges) {
    g.add_state(e.from, node_state(e.from));
    g.add_state(e.to, node_state(e.to));
    EventRecord ev;
    ev.objects = e.objects;
    ev.scene = e.scene;
    g.observe(e.from, e.a, e.to, ev);
  }
  for (int goal : goals) g.add_goal(goal);
  return g;
}

TransitionGraph diamond() {
  return synthetic({{1, Action::move_up, 2}, {1, Action::move_down, 3}, {2, Action::move_right, 4},
                    {3, Action::move_right, 4}},
                   {4});
}

TransitionGraph fixture_graph(const std::string& version, const std::string& task_id, int budget = 5000) {
  const auto& cfg = fixture(version);
  const auto& task = cfg.task(task_id);
  ProviderConfig provider;
  provider.mock_script_path = data_path("mock/" + version + "_seeds.jsonl").string();
  const auto prior = behavior_clone(generate_seeds(cfg, task, provider).seeds, cfg, task);
  AgentConfig agent;
  agent.task_step_budget = budget;
  TransitionGraph g(task_id, cfg.version_id, cfg.actions);
  return ingest(explore(cfg, task, prior, agent), g);
}

}  // namespace

TEST(Ingest, SingleTrajectoryCounts) {
  const auto cfg = line_config();
  const auto& task = cfg.tasks.front();
  const auto t = rollout(cfg, task, {Action::move_left, Action::pickup, Action::move_right, Action::move_up,
                                     Action::move_right});
  TransitionGraph g(task.task_id, cfg.version_id, cfg.actions);
  ingest({t}, g);
  EXPECT_LE(g.states().size(), 6u);
  EXPECT_LE(g.edges().size(), 5u);
  EXPECT_EQ(g.states().size(), 5u);  // move_up is a no-op self-loop
  EXPECT_EQ(g.edges().size(), 5u);
  EXPECT_EQ(g.s0(), hash_state(reset(cfg, task)));
  EXPECT_TRUE(g.goal_states().empty());
}

TEST(Ingest, SharedPrefixEdgesAppearOnce) {
  const auto cfg = line_config();
  const auto& task = cfg.tasks.front();
  // Second trajectory drops the tomato back where it was: s2 -drop-> s1.
  const auto a = rollout(cfg, task, {Action::move_left, Action::pickup, Action::move_right});
  const auto b = rollout(cfg, task, {Action::move_left, Action::pickup, Action::drop});
  TransitionGraph g(task.task_id, cfg.version_id, cfg.actions);
  ingest({a, b}, g);
  EXPECT_EQ(g.states().size(), 4u);
  EXPECT_EQ(g.edges().size(), 4u);
  const auto s0 = g.s0();
  EXPECT_EQ(g.edge(s0, Action::move_left)->meta.observations, 2);
  const auto s1 = g.edge(s0, Action::move_left)->to;
  const auto s2 = g.edge(s1, Action::pickup)->to;
  EXPECT_EQ(g.edge(s2, Action::drop)->to, s1);
}

TEST(Ingest, IdempotentTopologyMonotoneCounts) {
  const auto cfg = line_config();
  const auto& task = cfg.tasks.front();
  const auto t = rollout(cfg, task, line_solution());
  TransitionGraph once(task.task_id, cfg.version_id, cfg.actions);
  ingest({t}, once);
  TransitionGraph twice = once;
  ingest({t}, twice);
  ASSERT_EQ(once.states(), twice.states());
  ASSERT_EQ(once.goal_states(), twice.goal_states());
  ASSERT_EQ(once.edges().size(), twice.edges().size());
  for (const auto& [key, e] : once.edges()) {
    const auto* e2 = twice.edge(key.first, key.second);
    ASSERT_NE(e2, nullptr);
    EXPECT_EQ(e2->to, e.to);
    EXPECT_EQ(e2->meta.observations, 2 * e.meta.observations);
    EXPECT_EQ(e2->meta.objects, e.meta.objects);
  }
  EXPECT_EQ(once.goal_states().size(), 1u);
}

TEST(Ingest, ConflictingSuccessorIsNondeterminism) {
  auto g = synthetic({{1, Action::pickup, 2}}, {2});
  try {
    g.observe(1, Action::pickup, 3, EventRecord{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("nondeterminism detected"), std::string::npos);
  }
}

TEST(Ingest, RejectsTrajectoriesFromAnotherStart) {
  const auto cfg = line_config();
  const auto& task = cfg.tasks.front();
  auto t = rollout(cfg, task, {Action::move_left, Action::pickup});
  TransitionGraph g(task.task_id, cfg.version_id, cfg.actions);
  ingest({t}, g);
  t.transitions.erase(t.transitions.begin());
  EXPECT_THROW(ingest({t}, g), Error);
}

TEST(Enumerate, LinearGraphHasOnePath) {
  const auto g = synthetic({{1, Action::move_right, 2}, {2, Action::move_right, 3}, {3, Action::pickup, 4}}, {4});
  const auto paths = enumerate_paths(g, PathLimits{});
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].nodes, (std::vector<StateHash>{1, 2, 3, 4}));
  EXPECT_EQ(paths[0].actions, (std::vector<Action>{Action::move_right, Action::move_right, Action::pickup}));
}

TEST(Enumerate, DiamondHasTwoRoutes) {
  const auto paths = enumerate_paths(diamond(), PathLimits{});
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(paths[0].nodes, (std::vector<StateHash>{1, 2, 4}));
  EXPECT_EQ(paths[1].nodes, (std::vector<StateHash>{1, 3, 4}));
}

TEST(Enumerate, TruncationKeepsAlphabetFirstRoute) {
  PathLimits limits;
  limits.max_paths_per_goal = 1;
  const auto paths = enumerate_paths(diamond(), limits);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].actions.front(), Action::move_up);
}

TEST(Enumerate, DepthAndTotalLimits) {
  PathLimits limits;
  limits.max_depth = 1;
  Warnings w;
  EXPECT_TRUE(enumerate_paths(diamond(), limits, &w).empty());
  EXPECT_FALSE(w.empty());
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto g = oracle::random_graph(rng, 10);
    PathLimits cap;
    cap.max_total_paths = 3;
    EXPECT_LE(enumerate_paths(g, cap).size(), 3u);
  }
  EXPECT_THROW(enumerate_paths(diamond(), PathLimits{0, 1, 1}), Error);
}

TEST(Enumerate, NoGoalGivesEmptyListWithWarning) {
  const auto g = synthetic({{1, Action::move_right, 2}}, {});
  Warnings w;
  EXPECT_TRUE(enumerate_paths(g, PathLimits{}, &w).empty());
  ASSERT_EQ(w.size(), 1u);
  const auto unreachable = synthetic({{1, Action::move_right, 2}, {3, Action::move_right, 4}}, {4});
  Warnings w2;
  EXPECT_TRUE(enumerate_paths(unreachable, PathLimits{}, &w2).empty());
  EXPECT_EQ(w2.size(), 1u);
}

TEST(Enumerate, MatchesBruteForceOnSmallRandomGraphs) {
  std::mt19937_64 rng(2024);
  PathLimits generous{20, 100000, 100000};
  std::size_t total = 0;
  for (int i = 0; i < 60; ++i) {
    const auto g = oracle::random_graph(rng, 3 + i % 8);
    auto got = enumerate_paths(g, generous);
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, oracle::all_simple_paths(g, generous.max_depth)) << "graph " << i;
    total += got.size();
  }
  EXPECT_GT(total, 60u);
}

TEST(Enumerate, IsDeterministic) {
  const auto g = fixture_graph("v1", "make_salad", 2000);
  EXPECT_EQ(enumerate_paths(g, PathLimits{}), enumerate_paths(g, PathLimits{}));
}

TEST(TestCaseDerivation, MetadataFromEdges) {
  const auto one = synthetic({{1, Action::pickup, 2, {"tomato"}, "pantry"}}, {2});
  const auto paths = enumerate_paths(one, PathLimits{});
  ASSERT_EQ(paths.size(), 1u);
  const auto tc = to_test_case(paths[0], one, "c1");
  EXPECT_EQ(tc.metadata.objects, std::set<std::string>{"tomato"});
  EXPECT_DOUBLE_EQ(tc.exec_time, 1.0);
  EXPECT_EQ(tc.states, (std::vector<StateHash>{1, 2}));

  const auto cfg = line_config();
  const auto& task = cfg.tasks.front();
  TransitionGraph g(task.task_id, cfg.version_id, cfg.actions);
  ingest({rollout(cfg, task, line_solution())}, g);
  const auto line_paths = enumerate_paths(g, PathLimits{});
  ASSERT_EQ(line_paths.size(), 1u);
  const auto line_case = to_test_case(line_paths[0], g, "c2");
  EXPECT_EQ(line_case.metadata.scenes, (std::set<std::string>{"kitchen", "pantry"}));
  EXPECT_EQ(line_case.actions, line_solution());
}

TEST(TestCaseDerivation, MetadataIsUnionOverEdges) {
  const auto g = fixture_graph("v2", "combo_meal", 3000);
  const auto cases = derive_test_cases(enumerate_paths(g, PathLimits{}), g);
  ASSERT_FALSE(cases.empty());
  for (const auto& tc : cases) {
    CaseMetadata expected;
    double time = 0.0;
    for (std::size_t i = 0; i < tc.actions.size(); ++i) {
      const auto& e = g.edges().at({tc.states[i], tc.actions[i]});
      for (const auto& o : e.meta.objects) expected.objects.insert(o);
      for (const auto& u : e.meta.ui) expected.ui.insert(u);
      if (!e.meta.scene.empty()) expected.scenes.insert(e.meta.scene);
      time += e.meta.exec_time;
    }
    EXPECT_EQ(tc.metadata, expected);
    EXPECT_NEAR(tc.exec_time, time, 1e-9);
    EXPECT_EQ(tc.version_id, "v2");
  }
}

TEST(TestCaseDerivation, DanglingEdgeIsAnError) {
  const auto g = diamond();
  auto path = enumerate_paths(g, PathLimits{}).front();
  path.actions[1] = Action::pickup;
  try {
    to_test_case(path, g, "bad");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("dangling edge"), std::string::npos);
  }
  EXPECT_EQ(make_case_id("make_salad", 7), "make_salad-00007");
}

TEST(TestCaseDerivation, ReplaySoundnessOnFixtureGraphs) {
  for (const char* task_id : {"make_salad", "grill_meat", "serve_cheese"}) {
    const auto& cfg = fixture("v1");
    const auto& task = cfg.task(task_id);
    const auto g = fixture_graph("v1", task_id, 3000);
    const auto cases = derive_test_cases(enumerate_paths(g, PathLimits{}), g);
    ASSERT_FALSE(cases.empty()) << task_id;
    for (const auto& tc : cases) {
      auto s = reset(cfg, task);
      std::vector<StateHash> visited{hash_state(s)};
      bool goal = false;
      for (auto a : tc.actions) {
        const auto out = step(s, a, cfg, task);
        goal = out.goal_reached;
        s = out.next_state;
        visited.push_back(hash_state(s));
      }
      EXPECT_EQ(visited, tc.states);
      EXPECT_TRUE(goal);
      EXPECT_EQ(std::set<StateHash>(visited.begin(), visited.end()).size(), visited.size());
    }
  }
}

TEST(GraphStore, JsonRoundTrip) {
  const auto g = fixture_graph("v2", "serve_cheese", 1500);
  const auto text = graph_to_json(g).dump();
  const auto back = graph_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back, g);
  EXPECT_EQ(graph_to_json(back).dump(), text);
}
