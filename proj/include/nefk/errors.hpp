#pragma once
#include <stdexcept>
#include <string>
#include <vector>

namespace nefk {

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class SingularKernel : public std::runtime_error {
public:
  SingularKernel(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const { return condition_; }

private:
  double condition_;
};

class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

private:
  std::vector<double> history_;
};

class PatchError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace nefk
