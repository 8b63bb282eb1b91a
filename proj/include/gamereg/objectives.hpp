#pragma once

// Per-case objective metrics and the n-gram rarity table.

#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gamereg/error.hpp"
#include "gamereg/test_case.hpp"

namespace gamereg {

using Gram = std::vector<Action>;

struct NGramTable {
  int n = 2;
  std::map<Gram, long> counts;
  long total = 0;

  long count(const Gram& g) const {
    const auto it = counts.find(g);
    return it == counts.end() ? 0 : it->second;
  }

  bool operator==(const NGramTable&) const = default;
};

inline void add_grams(const std::vector<Action>& actions, NGramTable& table) {
  const auto n = static_cast<std::size_t>(table.n);
  if (actions.size() < n) return;
  for (std::size_t i = 0; i + n <= actions.size(); ++i) {
    ++table.counts[Gram(actions.begin() + static_cast<long>(i), actions.begin() + static_cast<long>(i + n))];
    ++table.total;
  }
}

inline NGramTable build_ngram_table(const std::vector<TestCase>& pool, int n = 2) {
  if (n < 1) throw Error("n-gram size must be at least 1");
  if (pool.empty()) throw Error("n-gram pool is empty");
  NGramTable table;
  table.n = n;
  for (const auto& c : pool) add_grams(c.actions, table);
  return table;
}

// Mean inverse frequency over the path's n-grams; 0 when the path is shorter
// than n. Grams missing from the table count once.
inline double rarity(const std::vector<Action>& actions, const NGramTable& table, Warnings* warnings = nullptr) {
  const auto n = static_cast<std::size_t>(table.n);
  if (actions.size() < n) return 0.0;
  double sum = 0.0;
  std::size_t grams = 0;
  bool missing = false;
  for (std::size_t i = 0; i + n <= actions.size(); ++i) {
    const Gram g(actions.begin() + static_cast<long>(i), actions.begin() + static_cast<long>(i + n));
    long c = table.count(g);
    if (c <= 0) {
      c = 1;
      missing = true;
    }
    sum += 1.0 / static_cast<double>(c);
    ++grams;
  }
  if (missing) warn(warnings, "n-gram absent from rarity table; counted as unique");
  return sum / static_cast<double>(grams);
}

inline double rarity(const TestCase& c, const NGramTable& table, Warnings* warnings = nullptr) {
  return rarity(c.actions, table, warnings);
}

inline ObjectiveVector compute_objectives(const TestCase& c, const NGramTable& table, Warnings* warnings = nullptr) {
  ObjectiveVector v;
  v.T = static_cast<int>(c.actions.size());
  v.R = c.exec_time;
  v.C = static_cast<int>(std::set<StateHash>(c.states.begin(), c.states.end()).size());
  v.A = static_cast<int>(std::set<Action>(c.actions.begin(), c.actions.end()).size());
  v.O = static_cast<int>(c.metadata.objects.size());
  v.S = static_cast<int>(c.metadata.scenes.size());
  v.U = static_cast<int>(c.metadata.ui.size());
  v.N = rarity(c, table, warnings);
  return v;
}

// Fills `objectives` on every case of the pool using one shared table.
inline NGramTable annotate_objectives(std::vector<TestCase>& pool, int n = 2, Warnings* warnings = nullptr) {
  auto table = build_ngram_table(pool, n);
  for (auto& c : pool) c.objectives = compute_objectives(c, table, warnings);
  return table;
}

}  // namespace gamereg
