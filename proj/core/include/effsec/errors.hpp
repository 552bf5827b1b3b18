#pragma once

#include <stdexcept>
#include <string>

namespace effsec {

/// An analysis refused to run because its configured resource bound would be
/// exceeded. Distinct from input errors so callers can map it to a dedicated
/// exit code.
class BudgetError : public std::runtime_error {
 public:
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

/// A goal the solver cannot handle, e.g. a reachability target that is not a
/// union of the attacker's observation classes.
class UnsupportedGoalError : public std::invalid_argument {
 public:
  explicit UnsupportedGoalError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace effsec
