#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace difftest {

/// Invalid user input: unknown model names, malformed configs, parameters
/// outside a model's bounds.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical operation left its domain (non-PD covariance, x <= 0 for a
/// phi function, probability outside (0,1), ...).
class NumericDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The Euler-Maruyama recursion produced a non-finite or exploding state.
class SimulationBlowup : public std::runtime_error {
 public:
  SimulationBlowup(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace difftest
