#pragma once

// Pluggable language-model backends. A backend turns one JSON prompt into a
// raw text response; transport failures throw BackendError.
//
// Mock script format (JSONL, one entry per line, consumed in order):
//   "raw response text"                          any purpose, any task
//   {"purpose": "seed", "task": "make_salad", "response": "..."}
//   {"purpose": "tags", "response": "..."}
// Lines whose purpose/task do not match a request are skipped for that
// request but remain available to others.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "gamereg/error.hpp"

namespace gamereg {

class BackendError : public Error {
 public:
  using Error::Error;
};

struct LlmRequest {
  std::string purpose;  // "seed" or "tags"
  std::string task_id;  // empty for tags
  nlohmann::ordered_json body;
};

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string complete(const LlmRequest& request) = 0;
};

class MockBackend final : public LlmBackend {
 public:
  struct Entry {
    std::string purpose;
    std::string task_id;
    std::string response;
  };

  explicit MockBackend(std::vector<Entry> entries) : entries_(std::move(entries)), used_(entries_.size(), false) {}

  static MockBackend from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("mock script not found: " + path.string());
    std::vector<Entry> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error&) {
        throw Error("mock script line " + std::to_string(lineno) + ": not JSON");
      }
      if (j.is_string()) {
        entries.push_back({"", "", j.get<std::string>()});
      } else if (j.is_object() && j.contains("response") && j["response"].is_string()) {
        entries.push_back({j.value("purpose", ""), j.value("task", ""), j["response"].get<std::string>()});
      } else {
        throw Error("mock script line " + std::to_string(lineno) + ": expected a string or {response}");
      }
    }
    return MockBackend(std::move(entries));
  }

  bool has_pending(const std::string& purpose, const std::string& task_id = "") const {
    return next_index(purpose, task_id).has_value();
  }

  std::string complete(const LlmRequest& request) override {
    const auto idx = next_index(request.purpose, request.task_id);
    if (!idx) throw BackendError("mock script exhausted for " + request.purpose + " " + request.task_id);
    used_[*idx] = true;
    return entries_[*idx].response;
  }

 private:
  std::optional<std::size_t> next_index(const std::string& purpose, const std::string& task_id) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (used_[i]) continue;
      const auto& e = entries_[i];
      if (!e.purpose.empty() && e.purpose != purpose) continue;
      if (!e.task_id.empty() && e.task_id != task_id) continue;
      return i;
    }
    return std::nullopt;
  }

  std::vector<Entry> entries_;
  std::vector<bool> used_;
};

struct HttpSettings {
  std::string endpoint;  // http://host:port/path
  std::string token;     // sent as "Authorization: Bearer <token>" when set
  double timeout_seconds = 30.0;
  int retries = 2;
  nlohmann::ordered_json sampling;  // passed through verbatim when non-null
};

// Reads GAMEREG_LLM_ENDPOINT and GAMEREG_LLM_TOKEN.
inline HttpSettings http_settings_from_env() {
  HttpSettings s;
  if (const char* e = std::getenv("GAMEREG_LLM_ENDPOINT")) s.endpoint = e;
  if (const char* t = std::getenv("GAMEREG_LLM_TOKEN")) s.token = t;
  return s;
}

class HttpBackend final : public LlmBackend {
 public:
  explicit HttpBackend(HttpSettings settings) : settings_(std::move(settings)) {
    const auto scheme_end = settings_.endpoint.find("://");
    if (scheme_end == std::string::npos) throw Error("http endpoint must be an absolute URL: " + settings_.endpoint);
    const auto path_start = settings_.endpoint.find('/', scheme_end + 3);
    base_ = settings_.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : settings_.endpoint.substr(path_start);
  }

  std::string complete(const LlmRequest& request) override {
    nlohmann::ordered_json body = request.body;
    if (!settings_.sampling.is_null()) body["sampling"] = settings_.sampling;
    const std::string payload = body.dump();

    httplib::Client client(base_);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(settings_.timeout_seconds));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!settings_.token.empty()) headers.emplace("Authorization", "Bearer " + settings_.token);

    std::string last_error;
    for (int attempt = 0; attempt <= settings_.retries; ++attempt) {
      auto res = client.Post(path_, headers, payload, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status / 100 != 2) {
        last_error = "HTTP status " + std::to_string(res->status);
        continue;
      }
      return res->body;
    }
    throw BackendError("http backend failed: " + last_error);
  }

 private:
  HttpSettings settings_;
  std::string base_;
  std::string path_;
};

}  // namespace gamereg
