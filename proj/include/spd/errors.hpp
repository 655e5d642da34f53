#pragma once

#include <stdexcept>
#include <string>

namespace spd {

// Bad flags, window orderings, hyperparameters. The CLI maps these to exit 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Missing files, missing columns, unusable scenarios. The CLI maps these to exit 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// An internal consistency check failed (e.g. a flow that violates conservation).
class SolverError : public std::logic_error {
 public:
  explicit SolverError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace spd
