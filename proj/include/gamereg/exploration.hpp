#pragma once

// Prior-guided exploration and the two baseline explorers.
//
// The explorer is tabular Q-learning whose Q-values start at
// prior(a|s) * prior_bonus, so actions taken by the cloned seeds are tried
// first. The per-step learning signal is env_reward + 1/n(s'), where n counts
// arrivals at s' (episode starts count as arrivals at s0) across the whole
// run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "gamereg/error.hpp"
#include "gamereg/game_env.hpp"
#include "gamereg/rng.hpp"
#include "gamereg/seed_provider.hpp"

namespace gamereg {

struct Transition {
  GameState state;
  Action action = Action::move_up;
  StepOutcome outcome;
  double bonus = 0.0;        // intrinsic novelty term
  double discrepancy = 0.0;  // cross-version signal (diff-Q only)

  bool operator==(const Transition&) const = default;
};

struct Trajectory {
  std::string task_id;
  std::vector<Transition> transitions;
  double total_reward = 0.0;  // environment reward only
  bool success = false;

  bool operator==(const Trajectory&) const = default;
  std::size_t steps() const { return transitions.size(); }
};

class Policy {
 public:
  explicit Policy(std::vector<Action> alphabet = {}) : alphabet_(std::move(alphabet)) {}

  const std::vector<Action>& alphabet() const { return alphabet_; }

  std::vector<double> probabilities(StateHash s) const {
    const auto it = table_.find(s);
    if (it != table_.end()) return it->second;
    return std::vector<double>(alphabet_.size(), 1.0 / static_cast<double>(alphabet_.size()));
  }

  double probability(StateHash s, Action a) const {
    const auto idx = index_of(a);
    return idx ? probabilities(s)[*idx] : 0.0;
  }

  void set(StateHash s, std::vector<double> probs) { table_[s] = std::move(probs); }
  bool knows(StateHash s) const { return table_.count(s) != 0; }
  std::size_t size() const { return table_.size(); }
  const std::unordered_map<StateHash, std::vector<double>>& table() const { return table_; }

  std::optional<std::size_t> index_of(Action a) const {
    const auto it = std::find(alphabet_.begin(), alphabet_.end(), a);
    if (it == alphabet_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - alphabet_.begin());
  }

  bool operator==(const Policy&) const = default;

 private:
  std::vector<Action> alphabet_;
  std::unordered_map<StateHash, std::vector<double>> table_;
};

struct EpsilonSchedule {
  enum class Kind { linear, step_decay };
  Kind kind = Kind::linear;
  double start = 0.3;
  double end = 0.05;  // linear: final value; step_decay: floor
  int interval = 100;
  double factor = 0.95;

  static EpsilonSchedule linear(double start, double end) { return {Kind::linear, start, end, 100, 1.0}; }
  static EpsilonSchedule step_decay(double start, double floor, int interval, double factor) {
    return {Kind::step_decay, start, floor, interval, factor};
  }

  double at(long step, long budget) const {
    if (kind == Kind::linear) {
      if (budget <= 1) return start;
      const double frac = std::clamp(static_cast<double>(step) / static_cast<double>(budget - 1), 0.0, 1.0);
      return start + (end - start) * frac;
    }
    const double e = start * std::pow(factor, static_cast<double>(step / interval));
    return std::max(end, e);
  }
};

struct AgentConfig {
  int episode_step_cap = 100;
  int task_step_budget = 5000;
  EpsilonSchedule epsilon = EpsilonSchedule::linear(0.3, 0.05);
  double q_alpha = 0.2;
  double q_gamma = 0.99;
  double prior_bonus = 10.0;
  double discrepancy_weight = 1.0;
  std::uint64_t random_seed = 42;

  void check() const {
    if (episode_step_cap <= 0 || task_step_budget <= 0) throw Error("agent budgets must be positive");
    if (epsilon.start < 0.0 || epsilon.start > 1.0 || epsilon.end < 0.0 || epsilon.end > 1.0) {
      throw Error("epsilon must lie in [0, 1]");
    }
  }
};

// Parameters of the differential Q-learning baseline.
inline AgentConfig diff_q_agent(AgentConfig base) {
  base.epsilon = EpsilonSchedule::step_decay(0.5, 0.01, 100, 0.95);
  base.q_alpha = 0.2;
  base.q_gamma = 0.99;
  return base;
}

inline Policy behavior_clone(const std::vector<SeedTrajectory>& seeds, const GameConfig& cfg, const TaskSpec& task) {
  if (seeds.empty()) throw Error("behavior_clone: no seeds");
  Policy policy(cfg.actions);
  std::unordered_map<StateHash, std::vector<double>> counts;
  const GameState s0 = reset(cfg, task);
  const StateHash h0 = hash_state(s0);
  bool advanced = false;
  for (const auto& seed : seeds) {
    GameState s = s0;
    for (const auto& st : seed.steps) {
      const auto idx = policy.index_of(st.action);
      if (!idx) break;
      auto& row = counts[hash_state(s)];
      row.resize(cfg.actions.size(), 0.0);
      row[*idx] += 1.0;
      const auto out = step(s, st.action, cfg, task);
      s = out.next_state;
      if (hash_state(s) != h0) advanced = true;
      if (out.goal_reached) break;
    }
  }
  if (!advanced) throw Error("behavior_clone: no seed advances past the initial state");
  for (auto& [h, row] : counts) {
    double total = 0.0;
    for (double c : row) total += c;
    for (double& c : row) c /= total;
    policy.set(h, row);
  }
  return policy;
}

namespace detail {

inline std::size_t greedy_index(const std::vector<double>& q, Rng& rng) {
  const double best = *std::max_element(q.begin(), q.end());
  std::size_t ties = 0;
  for (double v : q) ties += (v == best);
  std::size_t pick = pick_index(rng, ties);
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == best && pick-- == 0) return i;
  }
  return 0;
}

inline std::size_t epsilon_greedy(const std::vector<double>& q, double eps, Rng& rng) {
  if (uniform01(rng) < eps) return pick_index(rng, q.size());
  return greedy_index(q, rng);
}

class QTable {
 public:
  QTable(std::size_t actions, const Policy* prior, double bonus) : actions_(actions), prior_(prior), bonus_(bonus) {}

  std::vector<double>& row(StateHash s) {
    auto it = table_.find(s);
    if (it != table_.end()) return it->second;
    std::vector<double> init(actions_, 0.0);
    if (prior_ != nullptr) {
      const auto p = prior_->probabilities(s);
      for (std::size_t i = 0; i < actions_; ++i) init[i] = p[i] * bonus_;
    }
    return table_.emplace(s, std::move(init)).first->second;
  }

  double max_value(StateHash s) {
    const auto& r = row(s);
    return *std::max_element(r.begin(), r.end());
  }

 private:
  std::size_t actions_;
  const Policy* prior_;
  double bonus_;
  std::unordered_map<StateHash, std::vector<double>> table_;
};

}  // namespace detail

inline std::vector<Trajectory> explore(const GameConfig& cfg, const TaskSpec& task, const Policy& prior,
                                       const AgentConfig& agent) {
  agent.check();
  const auto& alphabet = cfg.actions;
  Rng rng(agent.random_seed);
  detail::QTable q(alphabet.size(), &prior, agent.prior_bonus);
  std::unordered_map<StateHash, long> visits;
  std::vector<Trajectory> out;
  const long budget = agent.task_step_budget;
  long used = 0;
  while (used < budget) {
    Trajectory traj{task.task_id, {}, 0.0, false};
    GameState s = reset(cfg, task);
    StateHash h = hash_state(s);
    ++visits[h];
    for (int t = 0; t < agent.episode_step_cap && used < budget; ++t) {
      const double eps = agent.epsilon.at(used, budget);
      const std::size_t ai = detail::epsilon_greedy(q.row(h), eps, rng);
      auto outcome = step(s, alphabet[ai], cfg, task);
      const StateHash h2 = hash_state(outcome.next_state);
      const double bonus = 1.0 / static_cast<double>(++visits[h2]);
      const double r = outcome.reward + bonus;
      const bool terminal = outcome.goal_reached;
      const double future = terminal ? 0.0 : agent.q_gamma * q.max_value(h2);
      auto& row = q.row(h);
      row[ai] += agent.q_alpha * (r + future - row[ai]);
      traj.total_reward += outcome.reward;
      GameState next = outcome.next_state;
      traj.transitions.push_back({std::move(s), alphabet[ai], std::move(outcome), bonus, 0.0});
      s = std::move(next);
      h = h2;
      ++used;
      if (terminal) {
        traj.success = true;
        break;
      }
    }
    out.push_back(std::move(traj));
  }
  return out;
}

inline std::vector<Trajectory> random_rollouts(const GameConfig& cfg, const TaskSpec& task, const AgentConfig& agent) {
  agent.check();
  const auto& alphabet = cfg.actions;
  Rng rng(agent.random_seed);
  std::vector<Trajectory> out;
  const long budget = agent.task_step_budget;
  long used = 0;
  while (used < budget) {
    Trajectory traj{task.task_id, {}, 0.0, false};
    GameState s = reset(cfg, task);
    for (int t = 0; t < agent.episode_step_cap && used < budget; ++t) {
      const Action a = alphabet[pick_index(rng, alphabet.size())];
      auto outcome = step(s, a, cfg, task);
      traj.total_reward += outcome.reward;
      const bool terminal = outcome.goal_reached;
      GameState next = outcome.next_state;
      traj.transitions.push_back({std::move(s), a, std::move(outcome), 0.0, 0.0});
      s = std::move(next);
      ++used;
      if (terminal) {
        traj.success = true;
        break;
      }
    }
    out.push_back(std::move(traj));
  }
  return out;
}

// Re-expresses a state of one version in another version's object set.
// Fails when the state references an object or processing state the target
// version does not declare.
inline std::optional<GameState> project_state(const GameState& s, const GameConfig& target) {
  GameState p;
  p.agent = s.agent;
  p.progress = s.progress;
  p.tick = s.tick;
  if (s.inventory) {
    if (target.object(*s.inventory) == nullptr) return std::nullopt;
    p.inventory = s.inventory;
  }
  for (const auto& spec : target.objects) {
    if (const auto* o = s.find(spec.id)) {
      if (std::find(spec.states.begin(), spec.states.end(), o->state) == spec.states.end()) return std::nullopt;
      p.objects.push_back(*o);
    } else {
      p.objects.push_back({spec.id, Place::cell, spec.cell, spec.states.front()});
    }
  }
  if (!target.in_bounds(p.agent) || target.kind_at(p.agent) == CellKind::wall) return std::nullopt;
  return p;
}

// 1 when the old version, run on the same state and action, disagrees with
// the new version on the successor state or the reward.
inline double transition_discrepancy(const GameState& s, Action a, const StepOutcome& new_outcome,
                                     const GameConfig& old_cfg, const TaskSpec& old_task) {
  const auto before = project_state(s, old_cfg);
  const auto after = project_state(new_outcome.next_state, old_cfg);
  if (!before || !after) return 1.0;
  const auto old_outcome = step(*before, a, old_cfg, old_task);
  const bool differs =
      hash_state(old_outcome.next_state) != hash_state(*after) || old_outcome.reward != new_outcome.reward;
  return differs ? 1.0 : 0.0;
}

inline std::vector<Trajectory> diff_q_learning(const GameConfig& old_cfg, const GameConfig& new_cfg,
                                               const std::string& task_id, const AgentConfig& agent) {
  agent.check();
  const TaskSpec& task = new_cfg.task(task_id);
  // Tasks introduced by the update have no old counterpart: every step counts
  // as a discrepancy.
  const TaskSpec* old_task = old_cfg.has_task(task_id) ? &old_cfg.task(task_id) : nullptr;
  const auto& alphabet = new_cfg.actions;
  Rng rng(agent.random_seed);
  detail::QTable q(alphabet.size(), nullptr, 0.0);
  std::vector<Trajectory> out;
  const long budget = agent.task_step_budget;
  long used = 0;
  while (used < budget) {
    Trajectory traj{task.task_id, {}, 0.0, false};
    GameState s = reset(new_cfg, task);
    StateHash h = hash_state(s);
    for (int t = 0; t < agent.episode_step_cap && used < budget; ++t) {
      const double eps = agent.epsilon.at(used, budget);
      const std::size_t ai = detail::epsilon_greedy(q.row(h), eps, rng);
      const Action a = alphabet[ai];
      auto outcome = step(s, a, new_cfg, task);
      const double disc = old_task ? transition_discrepancy(s, a, outcome, old_cfg, *old_task) : 1.0;
      const StateHash h2 = hash_state(outcome.next_state);
      const double r = outcome.reward + agent.discrepancy_weight * disc;
      const bool terminal = outcome.goal_reached;
      const double future = terminal ? 0.0 : agent.q_gamma * q.max_value(h2);
      auto& row = q.row(h);
      row[ai] += agent.q_alpha * (r + future - row[ai]);
      traj.total_reward += outcome.reward;
      GameState next = outcome.next_state;
      traj.transitions.push_back({std::move(s), a, std::move(outcome), 0.0, disc});
      s = std::move(next);
      h = h2;
      ++used;
      if (terminal) {
        traj.success = true;
        break;
      }
    }
    out.push_back(std::move(traj));
  }
  return out;
}

inline std::size_t total_steps(const std::vector<Trajectory>& trajectories) {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.steps();
  return n;
}

}  // namespace gamereg
