#pragma once

#include <set>
#include <string>

namespace effsec {

enum class GoalKind { safety, reachability };

/// A temporal objective over states: for safety the set is the avoid-set (the
/// goal is to stay outside it forever), for reachability it is the target.
struct Goal {
  GoalKind kind = GoalKind::safety;
  std::set<std::string> states;

  friend bool operator==(const Goal&, const Goal&) = default;
};

/// Complement of a goal against the full path set: avoiding X forever fails
/// exactly when X is reached, and vice versa. Involutive.
inline Goal negate_goal(const Goal& goal) {
  return Goal{goal.kind == GoalKind::safety ? GoalKind::reachability : GoalKind::safety,
              goal.states};
}

}  // namespace effsec
