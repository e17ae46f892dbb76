#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spmds {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Feeder graph is not a tree rooted at the slack node.
class TopologyError : public Error {
 public:
  using Error::Error;
};

// Input values or dimensions are out of range. Carries every problem found,
// not just the first one.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::string message)
      : Error(message), problems_{std::move(message)} {}
  explicit ValidationError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
      if (!out.empty()) out += "; ";
      out += item;
    }
    return out;
  }

  std::vector<std::string> problems_;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace spmds
