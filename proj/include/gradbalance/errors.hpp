#ifndef GRADBALANCE_ERRORS_HPP_
#define GRADBALANCE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace gradbalance {

// Base for everything this library throws. CLI maps ConfigError to exit
// code 2 and every other Error to exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, int task = -1)
      : Error(what), task_(task) {}
  int task() const { return task_; }

 private:
  int task_;
};

// A gradient too small (or too adversarial) for a method that divides by
// norms or Gram entries.
class DegenerateGradientError : public NumericError {
 public:
  explicit DegenerateGradientError(const std::string& what, int task = -1)
      : NumericError(what, task) {}
};

// Training blew up; carries a JSON snapshot of the run state at abort.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, std::string snapshot_json)
      : NumericError(what), snapshot_(std::move(snapshot_json)) {}
  const std::string& snapshot() const { return snapshot_; }

 private:
  std::string snapshot_;
};

}  // namespace gradbalance

#endif  // GRADBALANCE_ERRORS_HPP_
