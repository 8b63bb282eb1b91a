// gamereg: command-line front end for the regression pipeline.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gamereg/pipeline.hpp"
#include "gamereg/planner.hpp"

namespace fs = std::filesystem;
using namespace gamereg;

namespace {

struct Options {
  std::string config;
  std::string old_config;
  std::string new_config;
  std::vector<std::string> tasks;
  std::string log;
  std::string seeds;
  std::string backend = "mock";
  double lambda = 0.5;
  double proportion = 0.5;
  std::vector<double> proportions;
  int reps = 10;
  std::uint64_t seed = 42;
  std::string ablation = "full";
  std::string timing = "wall";
  std::string out = "out";
  int budget = 5000;
  int episode_cap = 100;
  int seeds_per_task = 20;
  int max_depth = 60;
  int max_paths_per_goal = 500;
  int max_total_paths = 5000;
  int ngram = 2;
  int threads = 0;
  int count = 20;
  std::vector<std::string> bench_steps;
};

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot read " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("malformed JSON in " + p.string() + ": " + e.what());
  }
}

void write_json(const fs::path& p, const nlohmann::ordered_json& j) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out << j.dump(1) << '\n';
}

void write_text(const fs::path& p, const std::string& s) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out << s;
}

// <config dir>/mock/<config stem>_seeds.jsonl
std::string default_seeds(const std::string& config) {
  const fs::path p(config);
  return (p.parent_path() / "mock" / (p.stem().string() + "_seeds.jsonl")).string();
}

ProviderConfig provider_of(const Options& o, const std::string& config) {
  ProviderConfig p;
  p.seeds_per_task = o.seeds_per_task;
  if (o.backend == "http") {
    p.backend = BackendKind::http;
    p.http = http_settings_from_env();
    if (p.http.endpoint.empty()) throw Error("GAMEREG_LLM_ENDPOINT is not set");
  } else if (o.backend == "mock") {
    p.backend = BackendKind::mock;
    p.mock_script_path = o.seeds.empty() ? default_seeds(config) : o.seeds;
  } else {
    throw Error("unknown backend " + o.backend);
  }
  return p;
}

AgentConfig agent_of(const Options& o) {
  AgentConfig a;
  a.task_step_budget = o.budget;
  a.episode_step_cap = o.episode_cap;
  a.random_seed = o.seed;
  return a;
}

PathLimits limits_of(const Options& o) { return {o.max_depth, o.max_paths_per_goal, o.max_total_paths}; }

TimingMode timing_of(const Options& o) {
  if (o.timing == "wall") return TimingMode::wall;
  if (o.timing == "simulated") return TimingMode::simulated;
  throw Error("unknown timing mode " + o.timing);
}

PipelineConfig pipeline_of(const Options& o) {
  PipelineConfig c;
  c.old_config = o.old_config;
  c.new_config = o.new_config;
  c.update_log = o.log;
  c.tasks = o.tasks;
  c.provider = provider_of(o, o.new_config);
  c.agent = agent_of(o);
  c.limits = limits_of(o);
  c.selection.lambda = o.lambda;
  c.selection.rts_proportion = o.proportion;
  c.ngram = o.ngram;
  c.repetitions = o.reps;
  c.random_seed = o.seed;
  c.ablation = parse_ablation(o.ablation);
  c.timing = timing_of(o);
  c.out_dir = o.out;
  c.threads = o.threads;
  return c;
}

void print_warnings(const Warnings& w) {
  for (const auto& m : w) std::cerr << "warning: " << m << '\n';
}

std::vector<std::string> tasks_or_all(const GameConfig& cfg, const std::vector<std::string>& filter) {
  std::vector<std::string> out;
  if (filter.empty()) {
    for (const auto& t : cfg.tasks) out.push_back(t.task_id);
    return out;
  }
  for (const auto& id : filter) out.push_back(cfg.task(id).task_id);
  return out;
}

// --- subcommands -------------------------------------------------------------

void cmd_explore(const Options& o) {
  const auto cfg = load_config(o.config);
  const auto provider = provider_of(o, o.config);
  const auto backend = make_backend(provider);
  const fs::path out(o.out);
  for (const auto& id : tasks_or_all(cfg, o.tasks)) {
    const auto& task = cfg.task(id);
    const auto batch = generate_seeds(cfg, task, *backend, provider);
    print_warnings(batch.warnings);
    auto seeds = nlohmann::ordered_json::array();
    for (const auto& s : batch.seeds) seeds.push_back(seed_to_json(s));
    write_json(out / ("seeds_" + id + ".json"), seeds);
    const auto trajectories = explore(cfg, task, behavior_clone(batch.seeds, cfg, task), agent_of(o));
    save_trajectories(trajectories, out / ("trajectories_" + id + ".jsonl"), out / ("states_" + id + ".json"));
    std::size_t wins = 0;
    for (const auto& t : trajectories) wins += t.success;
    std::cout << id << ": " << batch.seeds.size() << " seeds, " << trajectories.size() << " episodes, "
              << total_steps(trajectories) << " steps, " << wins << " reached the goal\n";
  }
}

void cmd_build_graph(const Options& o) {
  const auto cfg = load_config(o.config);
  const fs::path out(o.out);
  for (const auto& id : tasks_or_all(cfg, o.tasks)) {
    const auto trajectories =
        load_trajectories(out / ("trajectories_" + id + ".jsonl"), out / ("states_" + id + ".json"));
    TransitionGraph graph(id, cfg.version_id, cfg.actions);
    ingest(trajectories, graph);
    write_json(out / ("graph_" + id + ".json"), graph_to_json(graph));
    std::cout << id << ": " << graph.states().size() << " states, " << graph.edges().size() << " edges, "
              << graph.goal_states().size() << " goal states\n";
  }
}

void cmd_optimize(const Options& o) {
  const fs::path out(o.out);
  std::vector<fs::path> graphs;
  for (const auto& entry : fs::directory_iterator(out)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("graph_", 0) == 0 && entry.path().extension() == ".json") graphs.push_back(entry.path());
  }
  std::sort(graphs.begin(), graphs.end());
  if (graphs.empty()) throw Error("no graph_*.json files in " + out.string());
  Warnings warnings;
  std::vector<TestCase> candidates;
  for (const auto& p : graphs) {
    const auto graph = graph_from_json(read_json(p));
    if (!o.tasks.empty() && std::find(o.tasks.begin(), o.tasks.end(), graph.task_id()) == o.tasks.end()) continue;
    const auto cases = derive_test_cases(enumerate_paths(graph, limits_of(o), &warnings), graph);
    candidates.insert(candidates.end(), cases.begin(), cases.end());
  }
  if (candidates.empty()) throw Error("no candidate paths");
  annotate_objectives(candidates, o.ngram, &warnings);
  const bool bypass = !uses_optimizer(parse_ablation(o.ablation));
  const auto suite = bypass ? candidates : per_task_fronts(candidates);
  print_warnings(warnings);
  write_json(out / "candidates.json", cases_to_json(candidates));
  write_json(out / "optimized.json", cases_to_json(suite));
  std::cout << candidates.size() << " candidate paths, " << suite.size() << " kept\n";
}

void cmd_prioritize(const Options& o) {
  const fs::path out(o.out);
  const auto suite = cases_from_json(read_json(out / "optimized.json"));
  Warnings warnings;
  ProviderConfig provider;
  if (o.backend == "http") provider = provider_of(o, o.config);
  const auto tags = detail::tags_for(load_update_log(o.log), provider, &warnings);
  SelectionConfig sel;
  sel.lambda = o.lambda;
  sel.rts_proportion = o.proportion;
  const auto ranking = prioritize(suite, tags, sel, &warnings);
  print_warnings(warnings);
  write_json(out / "tags.json", tags_to_json(tags));
  write_json(out / "prioritized.json", prioritized_to_json(ranking));
  std::cout << ranking.entries.size() << " cases ranked, " << ranking.cut.size() << " selected\n";
}

void cmd_run(const Options& o) {
  const fs::path out(o.out);
  const auto cfg = load_config(o.new_config.empty() ? o.config : o.new_config);
  auto repo = fs::exists(out / "repository.json") ? repository_from_json(read_json(out / "repository.json"))
                                                  : Repository::from_cases(cases_from_json(read_json(out / "optimized.json")));
  const auto ranking = prioritized_from_json(read_json(out / "prioritized.json"));
  std::vector<RunResult> results;
  for (const auto& id : ranking.cut) {
    auto* entry = repo.find(id);
    if (entry == nullptr) throw Error("unknown case_id " + id);
    if (entry->obsolete) continue;
    if (!cfg.has_task(entry->tc.task_id)) {
      RunResult r;
      r.case_id = id;
      r.task_id = entry->tc.task_id;
      results.push_back(r);  // task removed: obsolete
      continue;
    }
    results.push_back(execute(entry->tc, cfg, timing_of(o)));
  }
  if (results.empty()) throw Error("nothing to execute");
  maintain(repo, results);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : results) arr.push_back(result_to_json(r));
  write_json(out / "results.json", arr);
  write_json(out / "repository.json", repository_to_json(repo));
  auto report = aggregate_metrics(results, 1);
  report.method = "pipeline";
  report.transition = cfg.version_id;
  report.proportion = ranking.proportion;
  write_json(out / "report.json", report_to_json(report));
  write_text(out / "report.txt", render_table({report}));
  std::cout << render_table({report});
}

void cmd_report(const Options& o) {
  const fs::path out(o.out);
  std::vector<SuiteReport> reports;
  for (const auto* name : {"bench.json", "report.json"}) {
    if (!fs::exists(out / name)) continue;
    const auto j = read_json(out / name);
    if (j.is_array()) {
      for (const auto& r : j) reports.push_back(report_from_json(r));
    } else {
      reports.push_back(report_from_json(j));
    }
    break;
  }
  if (reports.empty()) throw Error("no report.json or bench.json in " + out.string());
  const auto table = render_table(reports);
  write_text(out / "report.txt", table);
  std::cout << table;
}

void cmd_pipeline(const Options& o) {
  const auto report = run_pipeline(pipeline_of(o));
  std::cout << render_table({report});
}

// "v1:v2:log:seeds" or "old.json,new.json,log.txt[,seeds.jsonl]"
TransitionInputs parse_step(const std::string& spec) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : spec) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  if (parts.size() < 3 || parts.size() > 4) throw Error("--step expects old,new,log[,seeds]");
  return {parts[0], parts[1], parts[2], parts.size() == 4 ? parts[3] : default_seeds(parts[1])};
}

void cmd_bench(const Options& o) {
  BenchmarkConfig b;
  if (!o.bench_steps.empty()) {
    for (const auto& s : o.bench_steps) b.transitions.push_back(parse_step(s));
  } else {
    b.transitions.push_back({o.old_config, o.new_config, o.log, o.seeds.empty() ? default_seeds(o.new_config) : o.seeds});
  }
  if (!o.proportions.empty()) b.proportions = o.proportions;
  b.base = pipeline_of(o);
  const auto reports = run_benchmark(b);
  std::cout << render_table(reports);
}

// Writes a mock seed script by running the scripted planner.
void cmd_synth_mock(const Options& o) {
  const auto cfg = load_config(o.config);
  Rng rng(o.seed);
  std::ofstream out(o.out);
  if (!out) throw Error("cannot write " + o.out);
  for (const auto& id : tasks_or_all(cfg, o.tasks)) {
    const auto& task = cfg.task(id);
    for (int i = 0; i < o.count; ++i) {
      PlannerOptions opts;
      opts.detour_probability = i == 0 ? 0.0 : 0.25;
      const auto plan = plan_task(cfg, task, rng, opts);
      nlohmann::ordered_json line;
      line["purpose"] = "seed";
      line["task"] = id;
      line["response"] = seed_to_json(plan).dump();
      out << line.dump() << '\n';
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regression testing pipeline for grid cooking games"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "Base random seed")->capture_default_str();
    c->add_option("--out", o.out, "Output directory")->capture_default_str();
    c->add_option("--task", o.tasks, "Restrict to these task ids");
  };
  auto add_agent = [&](CLI::App* c) {
    c->add_option("--budget", o.budget, "Exploration steps per task")->capture_default_str();
    c->add_option("--episode-cap", o.episode_cap, "Steps per episode")->capture_default_str();
  };
  auto add_provider = [&](CLI::App* c) {
    c->add_option("--backend", o.backend, "Seed backend: mock or http")->capture_default_str();
    c->add_option("--seeds", o.seeds, "Mock seed script (JSONL)");
    c->add_option("--seeds-per-task", o.seeds_per_task, "Seed trajectories per task")->capture_default_str();
  };
  auto add_limits = [&](CLI::App* c) {
    c->add_option("--max-depth", o.max_depth)->capture_default_str();
    c->add_option("--max-paths-per-goal", o.max_paths_per_goal)->capture_default_str();
    c->add_option("--max-total-paths", o.max_total_paths)->capture_default_str();
    c->add_option("--ngram", o.ngram, "n-gram size for rarity")->capture_default_str();
  };
  auto add_selection = [&](CLI::App* c) {
    c->add_option("--lambda", o.lambda, "Relevance weight")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    c->add_option("--proportion", o.proportion, "Fraction of the suite to run")->capture_default_str();
    c->add_option("--log", o.log, "Update log");
  };
  auto add_run = [&](CLI::App* c) {
    c->add_option("--reps", o.reps, "Repetitions")->capture_default_str()->check(CLI::PositiveNumber);
    c->add_option("--ablation", o.ablation, "full, no_multi_opt, no_rts or no_both")->capture_default_str();
    c->add_option("--timing", o.timing, "wall or simulated")->capture_default_str();
    c->add_option("--threads", o.threads, "Worker threads (0: all cores)")->capture_default_str();
  };

  auto* explore_cmd = app.add_subcommand("explore", "Generate seeds and explore each task");
  explore_cmd->add_option("--config", o.config, "Game config")->required();
  add_common(explore_cmd);
  add_agent(explore_cmd);
  add_provider(explore_cmd);

  auto* graph_cmd = app.add_subcommand("build-graph", "Aggregate trajectories into transition graphs");
  graph_cmd->add_option("--config", o.config, "Game config")->required();
  add_common(graph_cmd);

  auto* opt_cmd = app.add_subcommand("optimize", "Enumerate paths and keep the Pareto front");
  add_common(opt_cmd);
  add_limits(opt_cmd);
  opt_cmd->add_option("--ablation", o.ablation, "no_multi_opt or no_both keep every path")->capture_default_str();

  auto* prio_cmd = app.add_subcommand("prioritize", "Rank the optimized suite against an update log");
  add_common(prio_cmd);
  add_selection(prio_cmd);
  prio_cmd->add_option("--config", o.config, "Game config (http backend only)");
  prio_cmd->add_option("--backend", o.backend, "Tag backend: mock (offline) or http")->capture_default_str();
  prio_cmd->get_option("--log")->required();

  auto* run_cmd = app.add_subcommand("run", "Execute the selected cases on a game version");
  run_cmd->add_option("--new,--config", o.new_config, "Game config to test")->required();
  run_cmd->add_option("--timing", o.timing, "wall or simulated")->capture_default_str();
  add_common(run_cmd);

  auto* report_cmd = app.add_subcommand("report", "Render report.json or bench.json as a table");
  add_common(report_cmd);

  auto* pipe_cmd = app.add_subcommand("pipeline", "Run every stage end to end");
  pipe_cmd->add_option("--old", o.old_config, "Previous version config")->required();
  pipe_cmd->add_option("--new", o.new_config, "New version config")->required();
  add_common(pipe_cmd);
  add_agent(pipe_cmd);
  add_provider(pipe_cmd);
  add_limits(pipe_cmd);
  add_selection(pipe_cmd);
  add_run(pipe_cmd);
  pipe_cmd->get_option("--log")->required();

  auto* bench_cmd = app.add_subcommand("bench", "Compare random play, diff-Qlearning and the pipeline");
  bench_cmd->add_option("--old", o.old_config, "Previous version config");
  bench_cmd->add_option("--new", o.new_config, "New version config");
  bench_cmd->add_option("--step", o.bench_steps, "Transition old,new,log[,seeds]; repeatable");
  bench_cmd->add_option("--proportions", o.proportions, "Selection proportions")->delimiter(',');
  add_common(bench_cmd);
  add_agent(bench_cmd);
  add_provider(bench_cmd);
  add_limits(bench_cmd);
  add_selection(bench_cmd);
  add_run(bench_cmd);

  auto* synth_cmd = app.add_subcommand("synth-mock", "Write a mock seed script from the scripted planner");
  synth_cmd->add_option("--config", o.config, "Game config")->required();
  synth_cmd->add_option("--count", o.count, "Responses per task")->capture_default_str();
  add_common(synth_cmd);

  CLI11_PARSE(app, argc, argv);
  try {
    if (explore_cmd->parsed()) cmd_explore(o);
    if (graph_cmd->parsed()) cmd_build_graph(o);
    if (opt_cmd->parsed()) cmd_optimize(o);
    if (prio_cmd->parsed()) cmd_prioritize(o);
    if (run_cmd->parsed()) cmd_run(o);
    if (report_cmd->parsed()) cmd_report(o);
    if (pipe_cmd->parsed()) cmd_pipeline(o);
    if (bench_cmd->parsed()) {
      if (o.bench_steps.empty() && (o.old_config.empty() || o.new_config.empty() || o.log.empty())) {
        throw Error("bench needs --old, --new and --log, or one or more --step");
      }
      cmd_bench(o);
    }
    if (synth_cmd->parsed()) cmd_synth_mock(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
