#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gamereg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-fatal diagnostics collected by operations that skip or degrade.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
  if (sink != nullptr) sink->push_back(std::move(message));
}

}  // namespace gamereg
