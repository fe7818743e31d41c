#pragma once

#include <stdexcept>
#include <string>

namespace ranumopt {

// Malformed or inconsistent input: bad instance files, schema violations,
// constraint-violating embedded solutions. Maps to CLI exit code 3.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solver failed to reach its convergence criterion within its
// iteration budget. Maps to CLI exit code 2.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Instance generation exhausted its retry budget (e.g. could not produce a
// topology without isolated nodes, or enough routable session pairs).
class GenerationError : public std::runtime_error {
 public:
  explicit GenerationError(const std::string& what) : std::runtime_error(what) {}
};

// A dual point with a zero session price: the rate subproblem is unbounded
// below in that direction, so the dual function is not evaluable there.
class UnboundedDualError : public std::runtime_error {
 public:
  explicit UnboundedDualError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ranumopt
