#pragma once

// End-to-end regression pipeline (explore, graph, optimize, prioritize,
// execute) and the comparative benchmark against random play and
// differential Q-learning.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "gamereg/error.hpp"
#include "gamereg/exploration.hpp"
#include "gamereg/game_config.hpp"
#include "gamereg/objectives.hpp"
#include "gamereg/pareto.hpp"
#include "gamereg/prioritize.hpp"
#include "gamereg/runner.hpp"
#include "gamereg/seed_provider.hpp"
#include "gamereg/tags.hpp"
#include "gamereg/trajectory_store.hpp"
#include "gamereg/transition_graph.hpp"

namespace gamereg {

enum class Ablation { full, no_multi_opt, no_rts, no_both };

inline std::string_view to_string(Ablation a) {
  switch (a) {
    case Ablation::full: return "full";
    case Ablation::no_multi_opt: return "no_multi_opt";
    case Ablation::no_rts: return "no_rts";
    case Ablation::no_both: return "no_both";
  }
  return "full";
}

inline Ablation parse_ablation(const std::string& s) {
  if (s == "full") return Ablation::full;
  if (s == "no_multi_opt") return Ablation::no_multi_opt;
  if (s == "no_rts") return Ablation::no_rts;
  if (s == "no_both") return Ablation::no_both;
  throw Error("unknown ablation " + s);
}

inline bool uses_optimizer(Ablation a) { return a == Ablation::full || a == Ablation::no_rts; }
inline bool uses_selection(Ablation a) { return a == Ablation::full || a == Ablation::no_multi_opt; }

enum class Persist { none, first_rep, all };

struct PipelineConfig {
  std::filesystem::path old_config;
  std::filesystem::path new_config;
  std::filesystem::path update_log;
  std::vector<std::string> tasks;  // empty: every task of the new version
  ProviderConfig provider;         // seed source for the new version
  AgentConfig agent;
  PathLimits limits;
  SelectionConfig selection;
  int ngram = 2;
  int repetitions = 10;
  std::uint64_t random_seed = 42;
  Ablation ablation = Ablation::full;
  TimingMode timing = TimingMode::wall;
  std::filesystem::path out_dir;  // empty: keep everything in memory
  Persist persist = Persist::all;
  int threads = 0;  // 0: hardware concurrency

  void check() const {
    if (repetitions < 1) throw Error("repetitions must be at least 1");
    if (ngram < 1) throw Error("n-gram size must be at least 1");
    for (const auto* p : {&old_config, &new_config, &update_log}) {
      if (!std::filesystem::exists(*p)) throw Error("missing input file " + p->string());
    }
    if (provider.backend == BackendKind::mock && !std::filesystem::exists(provider.mock_script_path)) {
      throw Error("missing mock seed script " + provider.mock_script_path);
    }
    agent.check();
    limits.check();
    selection.check();
  }
};

// Everything produced for one repetition up to (and including) ranking.
struct PreparedSuite {
  int repetition = 0;
  std::vector<TestCase> candidates;  // with objectives
  std::vector<TestCase> suite;       // optimizer output (or candidates when bypassed)
  TagSet tags;
  PrioritizedSuite ranking;          // over `suite`
  long exploration_steps = 0;
  Warnings warnings;
};

namespace detail {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw Error(std::string("stage ") + name + " failed: " + e.what());
  }
}

inline void write_json(const std::filesystem::path& p, const nlohmann::ordered_json& j) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out << j.dump(1) << '\n';
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

inline std::string rep_dir(int rep) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "rep_%02d", rep);
  return buf;
}

inline std::vector<std::string> task_ids(const GameConfig& cfg, const std::vector<std::string>& filter) {
  std::vector<std::string> out;
  if (filter.empty()) {
    for (const auto& t : cfg.tasks) out.push_back(t.task_id);
  } else {
    for (const auto& id : filter) {
      cfg.task(id);  // throws on unknown ids
      out.push_back(id);
    }
  }
  return out;
}

// Runs fn(i) for i in [0, n) on a small worker pool. Results are written by
// index so ordering never depends on scheduling.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::mutex m;
  int next = 0;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        int i;
        {
          std::lock_guard<std::mutex> lock(m);
          if (next >= n || failure) return;
          i = next++;
        }
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

inline TagSet tags_for(const UpdateLog& log, const ProviderConfig& provider, Warnings* warnings) {
  if (provider.backend == BackendKind::http) {
    auto backend = make_backend(provider);
    return extract_tags(log, backend.get(), true, warnings);
  }
  if (!provider.mock_script_path.empty() && std::filesystem::exists(provider.mock_script_path)) {
    auto mock = MockBackend::from_file(provider.mock_script_path);
    if (mock.has_pending("tags")) return extract_tags(log, &mock, true, warnings);
  }
  return extract_tags_fallback(log);
}

}  // namespace detail

inline std::string transition_label(const GameConfig& old_cfg, const GameConfig& new_cfg) {
  return old_cfg.version_id + "->" + new_cfg.version_id;
}

// Pareto front of each task's candidates, concatenated in first-seen task
// order, so that every task stays represented.
inline std::vector<TestCase> per_task_fronts(const std::vector<TestCase>& candidates) {
  std::vector<std::string> order;
  for (const auto& c : candidates) {
    if (std::find(order.begin(), order.end(), c.task_id) == order.end()) order.push_back(c.task_id);
  }
  std::vector<TestCase> suite;
  for (const auto& id : order) {
    std::vector<TestCase> pool;
    for (const auto& c : candidates) {
      if (c.task_id == id) pool.push_back(c);
    }
    const auto front = pareto_front(pool);
    suite.insert(suite.end(), front.begin(), front.end());
  }
  return suite;
}

// Exploration through ranking for one repetition.
inline PreparedSuite prepare_suite(const PipelineConfig& cfg, const GameConfig& new_cfg, const UpdateLog& log, int rep,
                                   const std::filesystem::path& artifacts = {}) {
  PreparedSuite out;
  out.repetition = rep;
  const bool persist = !artifacts.empty();
  AgentConfig agent = cfg.agent;
  agent.random_seed = cfg.random_seed + static_cast<std::uint64_t>(rep);

  const auto backend = detail::stage("seeds", [&] { return make_backend(cfg.provider); });
  const auto ids = detail::stage("load", [&] { return detail::task_ids(new_cfg, cfg.tasks); });
  for (const auto& task_id : ids) {
    const auto& task = new_cfg.task(task_id);
    const auto batch = detail::stage("seeds", [&] { return generate_seeds(new_cfg, task, *backend, cfg.provider); });
    out.warnings.insert(out.warnings.end(), batch.warnings.begin(), batch.warnings.end());
    const auto trajectories = detail::stage("explore", [&] {
      const auto prior = behavior_clone(batch.seeds, new_cfg, task);
      return explore(new_cfg, task, prior, agent);
    });
    out.exploration_steps += static_cast<long>(total_steps(trajectories));
    auto cases = detail::stage("build-graph", [&] {
      TransitionGraph graph(task_id, new_cfg.version_id, new_cfg.actions);
      ingest(trajectories, graph);
      const auto paths = enumerate_paths(graph, cfg.limits, &out.warnings);
      if (persist) {
        auto seeds = nlohmann::ordered_json::array();
        for (const auto& s : batch.seeds) seeds.push_back(seed_to_json(s));
        detail::write_json(artifacts / ("seeds_" + task_id + ".json"), seeds);
        save_trajectories(trajectories, artifacts / ("trajectories_" + task_id + ".jsonl"),
                          artifacts / ("states_" + task_id + ".json"));
        detail::write_json(artifacts / ("graph_" + task_id + ".json"), graph_to_json(graph));
      }
      return derive_test_cases(paths, graph);
    });
    out.candidates.insert(out.candidates.end(), cases.begin(), cases.end());
  }
  if (out.candidates.empty()) throw Error("stage build-graph failed: no candidate paths");

  detail::stage("optimize", [&] {
    annotate_objectives(out.candidates, cfg.ngram, &out.warnings);
    if (!uses_optimizer(cfg.ablation)) {
      out.suite = out.candidates;
      return 0;
    }
    out.suite = per_task_fronts(out.candidates);
    return 0;
  });

  detail::stage("prioritize", [&] {
    out.tags = detail::tags_for(log, cfg.provider, &out.warnings);
    SelectionConfig sel = cfg.selection;
    if (!uses_selection(cfg.ablation)) sel.rts_proportion = 1.0;
    out.ranking = prioritize(out.suite, out.tags, sel, &out.warnings);
    if (!uses_selection(cfg.ablation)) {
      // Original suite order, full suite.
      std::map<std::string, PriorityEntry> by_id;
      for (const auto& e : out.ranking.entries) by_id[e.case_id] = e;
      out.ranking.entries.clear();
      out.ranking.cut.clear();
      for (std::size_t i = 0; i < out.suite.size(); ++i) {
        auto e = by_id.at(out.suite[i].case_id);
        e.rank = static_cast<int>(i) + 1;
        e.selected = true;
        out.ranking.entries.push_back(e);
        out.ranking.cut.push_back(e.case_id);
      }
    }
    return 0;
  });

  if (persist) {
    detail::write_json(artifacts / "candidates.json", cases_to_json(out.candidates));
    detail::write_json(artifacts / "optimized.json", cases_to_json(out.suite));
    detail::write_json(artifacts / "tags.json", tags_to_json(out.tags));
    detail::write_json(artifacts / "prioritized.json", prioritized_to_json(out.ranking));
  }
  return out;
}

// Executes the cut of `ranking` at proportion p (or the whole ranking when
// selection is bypassed).
inline std::vector<RunResult> execute_cut(const PreparedSuite& prepared, const GameConfig& new_cfg, double proportion,
                                          Ablation ablation, TimingMode timing) {
  const auto ranking = uses_selection(ablation) ? recut(prepared.ranking, proportion) : prepared.ranking;
  std::map<std::string, const TestCase*> by_id;
  for (const auto& c : prepared.suite) by_id[c.case_id] = &c;
  std::vector<RunResult> results;
  for (const auto& id : ranking.cut) {
    auto r = execute(*by_id.at(id), new_cfg, timing);
    r.repetition = prepared.repetition;
    results.push_back(std::move(r));
  }
  return results;
}

struct PipelineOutcome {
  SuiteReport report;
  std::vector<std::vector<RunResult>> results;  // per repetition, execution order
  std::vector<PreparedSuite> prepared;
};

inline PipelineOutcome run_pipeline_detailed(const PipelineConfig& cfg) {
  cfg.check();
  const auto old_cfg = detail::stage("load", [&] { return load_config(cfg.old_config); });
  const auto new_cfg = detail::stage("load", [&] { return load_config(cfg.new_config); });
  const auto log = detail::stage("load", [&] { return load_update_log(cfg.update_log); });
  PipelineOutcome out;
  out.prepared.resize(static_cast<std::size_t>(cfg.repetitions));
  out.results.resize(static_cast<std::size_t>(cfg.repetitions));
  detail::parallel_for(cfg.repetitions, cfg.threads, [&](int rep) {
    std::filesystem::path artifacts;
    const bool keep = cfg.persist == Persist::all || (cfg.persist == Persist::first_rep && rep == 0);
    if (!cfg.out_dir.empty() && keep) artifacts = cfg.out_dir / detail::rep_dir(rep);
    auto prepared = prepare_suite(cfg, new_cfg, log, rep, artifacts);
    auto results = detail::stage("run", [&] {
      return execute_cut(prepared, new_cfg, cfg.selection.rts_proportion, cfg.ablation, cfg.timing);
    });
    if (!artifacts.empty()) {
      auto repo = Repository::from_cases(prepared.suite);
      maintain(repo, results);
      detail::write_json(artifacts / "repository.json", repository_to_json(repo));
      auto arr = nlohmann::ordered_json::array();
      for (const auto& r : results) arr.push_back(result_to_json(r));
      detail::write_json(artifacts / "results.json", arr);
    }
    out.prepared[static_cast<std::size_t>(rep)] = std::move(prepared);
    out.results[static_cast<std::size_t>(rep)] = std::move(results);
  });
  std::vector<RunResult> flat;
  for (const auto& r : out.results) flat.insert(flat.end(), r.begin(), r.end());
  if (flat.empty()) throw Error("stage report failed: nothing executed");
  out.report = aggregate_metrics(flat, cfg.repetitions);
  out.report.method = cfg.ablation == Ablation::full ? "pipeline" : "pipeline/" + std::string(to_string(cfg.ablation));
  out.report.transition = transition_label(old_cfg, new_cfg);
  if (uses_selection(cfg.ablation)) out.report.proportion = cfg.selection.rts_proportion;
  if (!cfg.out_dir.empty()) {
    detail::write_json(cfg.out_dir / "report.json", report_to_json(out.report));
    detail::write_text(cfg.out_dir / "report.txt", render_table({out.report}));
  }
  return out;
}

inline SuiteReport run_pipeline(const PipelineConfig& cfg) { return run_pipeline_detailed(cfg).report; }

// --- benchmark -----------------------------------------------------------------

struct TransitionInputs {
  std::filesystem::path old_config;
  std::filesystem::path new_config;
  std::filesystem::path update_log;
  std::filesystem::path seeds;  // mock seed script for the new version
};

struct BenchmarkConfig {
  std::vector<TransitionInputs> transitions;
  std::vector<double> proportions = {0.1, 0.3, 0.5, 0.7, 0.9};
  PipelineConfig base;  // agent, limits, selection, reps, seed, timing, threads
};

// RANDOM or diff-Qlearning over every task of the new version, one
// repetition. Wall-clock durations are spread over episodes by step share.
inline std::vector<RunResult> run_baseline(const std::string& method, const GameConfig& old_cfg,
                                           const GameConfig& new_cfg, const std::vector<std::string>& tasks,
                                           const AgentConfig& agent, int rep, TimingMode timing) {
  std::vector<RunResult> results;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& task_id : tasks) {
    const auto& task = new_cfg.task(task_id);
    const auto trajectories = method == "RANDOM" ? random_rollouts(new_cfg, task, agent)
                                                 : diff_q_learning(old_cfg, new_cfg, task_id, diff_q_agent(agent));
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
      results.push_back(episode_result(trajectories[i], task_id + "#" + std::to_string(i), rep));
    }
  }
  if (timing == TimingMode::wall) {
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    double steps = 0;
    for (const auto& r : results) steps += r.steps;
    for (auto& r : results) r.duration = steps > 0 ? elapsed * r.steps / steps : 0.0;
  }
  return results;
}

inline std::vector<SuiteReport> run_benchmark(const BenchmarkConfig& bench) {
  if (bench.transitions.empty()) throw Error("benchmark needs at least one transition");
  std::vector<SuiteReport> reports;
  const auto& base = bench.base;
  for (const auto& t : bench.transitions) {
    PipelineConfig cfg = base;
    cfg.old_config = t.old_config;
    cfg.new_config = t.new_config;
    cfg.update_log = t.update_log;
    cfg.provider.mock_script_path = t.seeds.string();
    cfg.out_dir.clear();
    cfg.check();
    const auto old_cfg = load_config(cfg.old_config);
    const auto new_cfg = load_config(cfg.new_config);
    const auto log = load_update_log(cfg.update_log);
    const auto tasks = detail::task_ids(new_cfg, cfg.tasks);
    const auto label = transition_label(old_cfg, new_cfg);
    const auto reps = static_cast<std::size_t>(cfg.repetitions);

    std::vector<std::vector<RunResult>> random(reps), diffq(reps);
    std::vector<std::vector<std::vector<RunResult>>> ours(reps);
    detail::parallel_for(cfg.repetitions, cfg.threads, [&](int rep) {
      AgentConfig agent = cfg.agent;
      agent.random_seed = cfg.random_seed + static_cast<std::uint64_t>(rep);
      const auto r = static_cast<std::size_t>(rep);
      random[r] = run_baseline("RANDOM", old_cfg, new_cfg, tasks, agent, rep, cfg.timing);
      diffq[r] = run_baseline("diff-Qlearning", old_cfg, new_cfg, tasks, agent, rep, cfg.timing);
      const auto prepared = prepare_suite(cfg, new_cfg, log, rep);
      for (double p : bench.proportions) {
        ours[r].push_back(execute_cut(prepared, new_cfg, p, Ablation::full, cfg.timing));
      }
    });
    auto report_of = [&](const std::string& method, const std::vector<std::vector<RunResult>>& per_rep) {
      std::vector<RunResult> flat;
      for (const auto& v : per_rep) flat.insert(flat.end(), v.begin(), v.end());
      auto rep = aggregate_metrics(flat, cfg.repetitions);
      rep.method = method;
      rep.transition = label;
      return rep;
    };
    reports.push_back(report_of("RANDOM", random));
    reports.push_back(report_of("diff-Qlearning", diffq));
    for (std::size_t k = 0; k < bench.proportions.size(); ++k) {
      std::vector<std::vector<RunResult>> per_rep;
      for (const auto& v : ours) per_rep.push_back(v[k]);
      auto rep = report_of("pipeline", per_rep);
      rep.proportion = bench.proportions[k];
      reports.push_back(std::move(rep));
    }
  }
  if (!base.out_dir.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) arr.push_back(report_to_json(r));
    detail::write_json(base.out_dir / "bench.json", arr);
    detail::write_text(base.out_dir / "bench.txt", render_table(reports));
  }
  return reports;
}

}  // namespace gamereg
