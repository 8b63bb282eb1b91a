#pragma once

// Semantic tags from update logs: language-model extraction with a
// deterministic keyword fallback.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gamereg/error.hpp"
#include "gamereg/llm_backend.hpp"
#include "gamereg/seed_provider.hpp"

namespace gamereg {

struct UpdateLog {
  std::string raw_text;
};

struct TagSet {
  std::vector<std::string> tags;
  std::string summary;

  bool operator==(const TagSet&) const = default;
};

inline UpdateLog load_update_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read update log " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return {ss.str()};
}

namespace detail {

inline const std::set<std::string>& tag_stop_words() {
  static const std::set<std::string> words = {
      "a",        "an",       "the",     "and",      "or",       "but",      "of",       "to",      "in",
      "on",       "at",       "by",       "for",     "from",     "with",     "without",  "into",     "onto",
      "as",       "is",       "are",      "was",     "were",     "be",       "been",     "being",    "it",
      "its",      "this",     "that",     "these",   "those",    "there",    "their",    "them",     "they",
      "now",      "no",       "not",      "longer",  "must",     "can",      "may",      "will",     "when",
      "while",    "where",    "which",    "who",     "before",   "after",    "then",     "than",     "so",
      "if",       "more",     "less",     "most",    "some",     "every",    "each",     "all",      "any",
      "also",     "only",     "new",      "issue",   "occasionally", "near", "through",  "up",       "down",
      "it's",     "has",      "have",     "had",     "does",     "do",       "did",      "same",     "other",
      "fixed",    "fix",      "fixes",    "added",   "add",      "adds",     "adjusted", "adjust",   "unified",
      "removed",  "remove",   "improved", "improve", "updated",  "update",   "changed",  "change",   "introduced",
      "introduce", "introducing", "reduced", "reduce", "increased", "increase", "made",   "make",     "now",
      "release",  "date",     "version",  "e",       "g",        "eg",       "etc",      "two",      "one",
      "several",  "both",     "together", "being",   "used",     "use",      "time",     "times",    "second",
  };
  return words;
}

inline std::vector<std::string> words_of(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (unsigned char ch : text) {
    if (std::isalnum(ch)) {
      cur.push_back(static_cast<char>(std::tolower(ch)));
    } else if (std::isspace(ch) || ch == '_' || ch == '-' || ch == '\'') {
      flush();
    } else {
      flush();
      out.emplace_back();  // punctuation ends a phrase
    }
  }
  flush();
  return out;
}

inline bool has_digit(const std::string& w) {
  return std::any_of(w.begin(), w.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Maximal runs of content words, split at stop words, punctuation and tokens
// containing digits.
inline std::vector<std::string> phrase_chunks(const std::string& text) {
  std::vector<std::string> chunks;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) chunks.push_back(cur);
    cur.clear();
  };
  for (const auto& w : words_of(text)) {
    if (w.empty() || tag_stop_words().count(w) || has_digit(w)) {
      flush();
      continue;
    }
    cur += (cur.empty() ? "" : " ") + w;
  }
  flush();
  return chunks;
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline std::size_t word_count(const std::string& s) {
  std::istringstream ss(s);
  std::size_t n = 0;
  for (std::string w; ss >> w;) ++n;
  return n;
}

}  // namespace detail

// Offline extractor. Section headers ("New Features:") and the release line
// are skipped. A bullet of the form "Head: text" with a short head yields the
// head; any other bullet yields its content-word phrases.
inline TagSet extract_tags_fallback(const UpdateLog& log) {
  if (detail::trim(log.raw_text).empty()) throw Error("update log is empty");
  TagSet out;
  std::set<std::string> seen;
  auto add = [&](std::string tag) {
    tag = detail::trim(tag);
    if (tag.empty() || detail::has_digit(tag) || seen.count(tag)) return;
    seen.insert(tag);
    out.tags.push_back(tag);
  };
  std::istringstream in(log.raw_text);
  std::size_t bullets = 0;
  for (std::string line; std::getline(in, line);) {
    line = detail::trim(line);
    if (line.empty()) continue;
    const bool bullet = line[0] == '-' || line[0] == '*';
    if (!bullet) continue;  // title, release date, section headers
    line = detail::trim(line.substr(1));
    if (line.empty()) continue;
    ++bullets;
    const auto colon = line.find(':');
    if (colon != std::string::npos && colon + 1 < line.size()) {
      const auto head = detail::trim(line.substr(0, colon));
      if (!head.empty() && detail::word_count(head) <= 5) {
        std::string norm;
        for (const auto& w : detail::words_of(head)) {
          if (!w.empty() && !detail::has_digit(w)) norm += (norm.empty() ? "" : " ") + w;
        }
        add(norm);
        continue;
      }
    }
    for (auto& chunk : detail::phrase_chunks(line)) add(chunk);
  }
  if (out.tags.empty()) throw Error("no tags");
  out.summary = "Update touching " + std::to_string(out.tags.size()) + " components across " +
                std::to_string(bullets) + " entries.";
  return out;
}

inline nlohmann::ordered_json build_tag_prompt(const UpdateLog& log) {
  nlohmann::ordered_json j;
  j["update log"] = log.raw_text;
  j["instructions"] =
      "List the game components affected by this update log: items, actions, UI, functions, environment and "
      "mechanics. Leave out version numbers and filler words. Write every tag as a lowercase phrase.";
  j["output_format"] =
      "Return a JSON object with fields tags (list of keyword tags) and summary (one sentence describing the log).";
  return j;
}

inline TagSet parse_tag_response(const std::string& response) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::strip_code_fence(response));
  } catch (const nlohmann::json::parse_error&) {
    throw Error("malformed JSON in tag response");
  }
  if (!j.is_object() || !j.contains("tags") || !j["tags"].is_array()) throw Error("tag response lacks a tags array");
  TagSet out;
  std::set<std::string> seen;
  for (const auto& t : j["tags"]) {
    if (!t.is_string()) continue;
    auto tag = detail::lower(detail::trim(t.get<std::string>()));
    if (tag.empty() || detail::has_digit(tag) || seen.count(tag)) continue;
    seen.insert(tag);
    out.tags.push_back(tag);
  }
  if (j.contains("summary") && j["summary"].is_string()) out.summary = j["summary"].get<std::string>();
  if (out.tags.empty()) throw Error("no tags");
  return out;
}

// Asks the backend when one is given; falls back to the offline extractor on
// transport failure or a malformed answer, unless fallback is disabled.
inline TagSet extract_tags(const UpdateLog& log, LlmBackend* backend, bool allow_fallback = true,
                           Warnings* warnings = nullptr) {
  if (detail::trim(log.raw_text).empty()) throw Error("update log is empty");
  if (backend != nullptr) {
    try {
      return parse_tag_response(backend->complete({"tags", "", build_tag_prompt(log)}));
    } catch (const Error& e) {
      if (!allow_fallback) throw;
      warn(warnings, std::string("tag extraction fell back to keywords: ") + e.what());
    }
  }
  return extract_tags_fallback(log);
}

inline nlohmann::ordered_json tags_to_json(const TagSet& t) { return {{"tags", t.tags}, {"summary", t.summary}}; }

inline TagSet tags_from_json(const nlohmann::json& j) {
  return {j.at("tags").get<std::vector<std::string>>(), j.value("summary", "")};
}

}  // namespace gamereg
