#pragma once

#include <stdexcept>
#include <string>

namespace rotseq {

/// Caller violated a documented precondition (shapes, aliasing, ranges).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

/// Block-size planning could not satisfy the cache inequalities.
class PlanningError : public std::runtime_error {
 public:
  explicit PlanningError(const std::string& what) : std::runtime_error(what) {}
};

/// An analytic model was evaluated outside its validity region.
class ModelError : public std::domain_error {
 public:
  explicit ModelError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace rotseq
