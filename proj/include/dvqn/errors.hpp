#pragma once

#include <stdexcept>
#include <string>

namespace dvqn {

// Shape or wiring violation: mismatched dimensions, duplicate/missing names.
class StructuralError : public std::runtime_error {
 public:
  explicit StructuralError(const std::string& msg) : std::runtime_error(msg) {}
};

// API protocol violation: step after done, clustering with k > n, etc.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values or degenerate data detected during computation.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid config file, CLI arguments, or file formats.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Replay buffer holds fewer transitions than the requested batch.
class InsufficientSamplesError : public std::runtime_error {
 public:
  explicit InsufficientSamplesError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dvqn
