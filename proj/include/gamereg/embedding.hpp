#pragma once

// Text embeddings. The built-in embedder hashes character trigrams into a
// fixed number of buckets and L2-normalizes the counts.

#include <cctype>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "gamereg/error.hpp"
#include "gamereg/game_env.hpp"

namespace gamereg {

using Embedding = std::vector<double>;

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Embedding embed(std::string_view text) const = 0;
  virtual std::size_t dims() const = 0;
};

// Lowercases, maps every non-alphanumeric byte to a space and collapses runs.
inline std::string normalize_text(std::string_view text) {
  std::string out;
  bool space = true;
  for (unsigned char ch : text) {
    if (std::isalnum(ch)) {
      out.push_back(static_cast<char>(std::tolower(ch)));
      space = false;
    } else if (!space) {
      out.push_back(' ');
      space = true;
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

class TrigramEmbedder final : public Embedder {
 public:
  explicit TrigramEmbedder(std::size_t dims = 256) : dims_(dims) {
    if (dims_ == 0) throw Error("embedding dimension must be positive");
  }

  std::size_t dims() const override { return dims_; }

  Embedding embed(std::string_view text) const override {
    Embedding v(dims_, 0.0);
    const auto norm = normalize_text(text);
    if (norm.empty()) return v;
    const std::string padded = " " + norm + " ";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      v[fnv1a64(std::string_view(padded).substr(i, 3)) % dims_] += 1.0;
    }
    double sq = 0.0;
    for (double x : v) sq += x * x;
    const double len = std::sqrt(sq);
    for (double& x : v) x /= len;
    return v;
  }

 private:
  std::size_t dims_;
};

inline double cosine(const Embedding& a, const Embedding& b) {
  if (a.size() != b.size()) throw Error("embedding dimensions differ");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace gamereg
