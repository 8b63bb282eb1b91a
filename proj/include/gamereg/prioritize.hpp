#pragma once

// Update-aware prioritization: relevance to update tags blended with a
// semantic complexity score, then cut at a proportion of the suite.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gamereg/embedding.hpp"
#include "gamereg/error.hpp"
#include "gamereg/objectives.hpp"
#include "gamereg/tags.hpp"
#include "gamereg/test_case.hpp"

namespace gamereg {

inline constexpr double kLengthFloor = 0.05;

struct SelectionConfig {
  double lambda = 0.5;
  double rts_proportion = 0.5;
  std::size_t dims = 256;

  void check() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("lambda must lie in [0, 1]");
    if (!(rts_proportion > 0.0 && rts_proportion <= 1.0)) throw Error("proportion must lie in (0, 1]");
  }
};

struct PriorityEntry {
  std::string case_id;
  double sim = 0.0;
  double scs = 0.0;
  double score = 0.0;
  int rank = 0;
  bool selected = false;

  bool operator==(const PriorityEntry&) const = default;
};

struct PrioritizedSuite {
  std::vector<PriorityEntry> entries;  // rank order
  std::vector<std::string> cut;        // selected case ids, rank order
  double lambda = 0.5;
  double proportion = 1.0;

  bool operator==(const PrioritizedSuite&) const = default;
};

// Number of cases kept at proportion p (ceil, tolerant of p*n landing a hair
// above an integer).
inline std::size_t cut_size(double p, std::size_t n) {
  if (n == 0) return 0;
  const double raw = std::ceil(p * static_cast<double>(n) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(0.0, raw)), 1, n);
}

// Canonical text of a case for embedding.
inline std::string case_text(const TestCase& c) {
  std::string out = "actions:";
  std::set<Action> seen;
  for (auto a : c.actions) {
    if (seen.insert(a).second) out += " " + std::string(to_string(a));
  }
  auto join = [](const std::set<std::string>& items) {
    std::string s;
    for (const auto& x : items) s += " " + x;
    return s;
  };
  out += "; objects:" + join(c.metadata.objects);
  out += "; scenes:" + join(c.metadata.scenes);
  out += "; ui:" + join(c.metadata.ui);
  out += "; states: " + std::to_string(std::set<StateHash>(c.states.begin(), c.states.end()).size());
  return out;
}

inline double relevance(const TestCase& c, const std::vector<Embedding>& tag_vectors, const Embedder& embedder) {
  if (tag_vectors.empty()) throw Error("no tags");
  const auto v = embedder.embed(case_text(c));
  double best = -1.0;
  for (const auto& t : tag_vectors) best = std::max(best, cosine(v, t));
  return best;
}

inline double relevance(const TestCase& c, const TagSet& tags, const Embedder& embedder) {
  std::vector<Embedding> vs;
  for (const auto& t : tags.tags) vs.push_back(embedder.embed(t));
  return relevance(c, vs, embedder);
}

namespace detail {

inline ObjectiveVector counts_of(const TestCase& c) {
  if (c.objectives) return *c.objectives;
  ObjectiveVector v;
  v.T = static_cast<int>(c.actions.size());
  v.C = static_cast<int>(std::set<StateHash>(c.states.begin(), c.states.end()).size());
  v.A = static_cast<int>(std::set<Action>(c.actions.begin(), c.actions.end()).size());
  v.O = static_cast<int>(c.metadata.objects.size());
  v.S = static_cast<int>(c.metadata.scenes.size());
  v.U = static_cast<int>(c.metadata.ui.size());
  return v;
}

struct MinMax {
  double lo = 0.0;
  double hi = 0.0;
  double operator()(double x) const { return hi == lo ? 0.5 : (x - lo) / (hi - lo); }
};

template <typename Get>
MinMax min_max(const std::vector<ObjectiveVector>& vs, Get get) {
  MinMax m{get(vs.front()), get(vs.front())};
  for (const auto& v : vs) {
    m.lo = std::min(m.lo, get(v));
    m.hi = std::max(m.hi, get(v));
  }
  return m;
}

}  // namespace detail

// SCS of every suite member, in suite order.
inline std::vector<double> scs_all(const std::vector<TestCase>& suite) {
  if (suite.empty()) throw Error("suite is empty");
  std::vector<ObjectiveVector> vs;
  for (const auto& c : suite) vs.push_back(detail::counts_of(c));
  const auto a = detail::min_max(vs, [](const ObjectiveVector& v) { return double(v.A); });
  const auto o = detail::min_max(vs, [](const ObjectiveVector& v) { return double(v.O); });
  const auto s = detail::min_max(vs, [](const ObjectiveVector& v) { return double(v.S); });
  const auto u = detail::min_max(vs, [](const ObjectiveVector& v) { return double(v.U); });
  const auto g = detail::min_max(vs, [](const ObjectiveVector& v) { return double(v.C); });
  const auto l = detail::min_max(vs, [](const ObjectiveVector& v) { return double(v.T); });
  std::vector<double> out;
  for (const auto& v : vs) {
    const double num = a(v.A) + o(v.O) + s(v.S) + u(v.U) + g(v.C);
    out.push_back(num / std::max(kLengthFloor, l(v.T)));
  }
  return out;
}

inline double scs(const TestCase& c, const std::vector<TestCase>& suite) {
  const auto it = std::find_if(suite.begin(), suite.end(), [&](const TestCase& x) { return x.case_id == c.case_id; });
  if (it == suite.end()) throw Error("case " + c.case_id + " is not in the suite");
  return scs_all(suite)[static_cast<std::size_t>(it - suite.begin())];
}

inline PrioritizedSuite prioritize(const std::vector<TestCase>& suite, const TagSet& tags, const SelectionConfig& cfg,
                                   const Embedder& embedder, Warnings* warnings = nullptr) {
  cfg.check();
  if (suite.empty()) throw Error("suite is empty");
  if (tags.tags.empty()) throw Error("no tags");
  std::vector<Embedding> tag_vectors;
  for (const auto& t : tags.tags) tag_vectors.push_back(embedder.embed(t));
  const auto complexity = scs_all(suite);
  const double max_scs = *std::max_element(complexity.begin(), complexity.end());
  if (max_scs <= 0.0) warn(warnings, "maximum complexity score is 0; complexity term dropped");

  PrioritizedSuite out;
  out.lambda = cfg.lambda;
  out.proportion = cfg.rts_proportion;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    PriorityEntry e;
    e.case_id = suite[i].case_id;
    e.sim = relevance(suite[i], tag_vectors, embedder);
    e.scs = complexity[i];
    const double norm = max_scs > 0.0 ? complexity[i] / max_scs : 0.0;
    e.score = cfg.lambda * e.sim + (1.0 - cfg.lambda) * norm;
    out.entries.push_back(std::move(e));
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const PriorityEntry& x, const PriorityEntry& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.case_id < y.case_id;
  });
  const auto k = cut_size(cfg.rts_proportion, out.entries.size());
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    out.entries[i].rank = static_cast<int>(i) + 1;
    out.entries[i].selected = i < k;
    if (i < k) out.cut.push_back(out.entries[i].case_id);
  }
  return out;
}

inline PrioritizedSuite prioritize(const std::vector<TestCase>& suite, const TagSet& tags, const SelectionConfig& cfg,
                                   Warnings* warnings = nullptr) {
  return prioritize(suite, tags, cfg, TrigramEmbedder(cfg.dims), warnings);
}

// Same ranking, new proportion.
inline PrioritizedSuite recut(PrioritizedSuite suite, double proportion) {
  if (!(proportion > 0.0 && proportion <= 1.0)) throw Error("proportion must lie in (0, 1]");
  suite.proportion = proportion;
  suite.cut.clear();
  const auto k = cut_size(proportion, suite.entries.size());
  for (std::size_t i = 0; i < suite.entries.size(); ++i) {
    suite.entries[i].selected = i < k;
    if (i < k) suite.cut.push_back(suite.entries[i].case_id);
  }
  return suite;
}

inline nlohmann::ordered_json prioritized_to_json(const PrioritizedSuite& p) {
  nlohmann::ordered_json j;
  j["lambda"] = p.lambda;
  j["proportion"] = p.proportion;
  auto entries = nlohmann::ordered_json::array();
  for (const auto& e : p.entries) {
    entries.push_back({{"case_id", e.case_id},
                       {"sim", e.sim},
                       {"scs", e.scs},
                       {"score", e.score},
                       {"rank", e.rank},
                       {"selected", e.selected}});
  }
  j["entries"] = std::move(entries);
  j["cut"] = p.cut;
  return j;
}

inline PrioritizedSuite prioritized_from_json(const nlohmann::json& j) {
  PrioritizedSuite p;
  p.lambda = j.at("lambda").get<double>();
  p.proportion = j.at("proportion").get<double>();
  for (const auto& e : j.at("entries")) {
    p.entries.push_back({e.at("case_id").get<std::string>(), e.at("sim").get<double>(), e.at("scs").get<double>(),
                         e.at("score").get<double>(), e.at("rank").get<int>(), e.at("selected").get<bool>()});
  }
  p.cut = j.at("cut").get<std::vector<std::string>>();
  return p;
}

}  // namespace gamereg
