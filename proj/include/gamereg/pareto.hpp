#pragma once

// Exact Pareto front. T and R are costs; every other objective is a benefit.

#include <array>
#include <vector>

#include "gamereg/error.hpp"
#include "gamereg/test_case.hpp"

namespace gamereg {

inline constexpr std::size_t kObjectiveCount = 8;

// Objectives oriented so that smaller is better for every component.
inline std::array<double, kObjectiveCount> oriented(const ObjectiveVector& v) {
  return {static_cast<double>(v.T), v.R,  -static_cast<double>(v.C), -static_cast<double>(v.A),
          -static_cast<double>(v.O), -static_cast<double>(v.S), -static_cast<double>(v.U), -v.N};
}

// True when `a` is no worse than `b` everywhere and strictly better somewhere.
inline bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  const auto x = oriented(a);
  const auto y = oriented(b);
  bool strict = false;
  for (std::size_t k = 0; k < kObjectiveCount; ++k) {
    if (x[k] > y[k]) return false;
    if (x[k] < y[k]) strict = true;
  }
  return strict;
}

// Indices of the non-dominated vectors, in input order.
inline std::vector<std::size_t> pareto_indices(const std::vector<ObjectiveVector>& pool) {
  // Archive pass: candidates that survive every archived point so far. Any
  // dominated vector is dominated by some non-dominated one, so a final sweep
  // against the archive is exact.
  std::vector<std::size_t> archive;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    bool dominated = false;
    for (auto j : archive) {
      if (dominates(pool[j], pool[i])) {
        dominated = true;
        break;
      }
    }
    if (dominated) continue;
    std::vector<std::size_t> kept;
    for (auto j : archive) {
      if (!dominates(pool[i], pool[j])) kept.push_back(j);
    }
    kept.push_back(i);
    archive = std::move(kept);
  }
  std::vector<bool> in_front(pool.size(), false);
  for (auto j : archive) in_front[j] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (in_front[i]) out.push_back(i);
  }
  return out;
}

inline std::vector<TestCase> pareto_front(const std::vector<TestCase>& pool) {
  std::vector<ObjectiveVector> vectors;
  vectors.reserve(pool.size());
  for (const auto& c : pool) {
    if (!c.objectives) throw Error("test case " + c.case_id + " has no objectives");
    vectors.push_back(*c.objectives);
  }
  std::vector<TestCase> out;
  for (auto i : pareto_indices(vectors)) out.push_back(pool[i]);
  return out;
}

}  // namespace gamereg
