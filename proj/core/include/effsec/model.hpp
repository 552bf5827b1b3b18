#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace effsec {

enum class Role { high, low };

struct AgentDecl {
  std::string name;
  Role role = Role::low;
};

/// A pair (user, action): the unit every execution is made of.
struct PersonalizedAction {
  std::string agent;
  std::string action;

  friend bool operator==(const PersonalizedAction&, const PersonalizedAction&) = default;
};

using ActionSequence = std::vector<PersonalizedAction>;

/// Result of running a sequence: a state, or nothing when some step of a
/// partial network is undefined.
using ExecResult = std::optional<std::string>;

/// A multi-agent asynchronous transition network, possibly partial.
///
/// Transitions that are absent from the map are undefined; there is no
/// sentinel state. All fields are plain so that malformed networks can be
/// built and handed to validate_network.
struct TransitionNetwork {
  std::string name;
  std::vector<std::string> states;
  std::string initial;
  std::vector<AgentDecl> agents;
  std::vector<std::string> actions;
  std::vector<std::string> observations;

  /// (state, agent) -> observation label. Total on states x agents.
  std::map<std::pair<std::string, std::string>, std::string> obs;

  /// (state, agent, action) -> successor state. Partial; deterministic by
  /// construction of the map.
  std::map<std::tuple<std::string, std::string, std::string>, std::string> transitions;

  bool has_state(const std::string& s) const;
  bool has_agent(const std::string& u) const;
  bool has_action(const std::string& a) const;
  bool has_observation(const std::string& o) const;

  /// Role of a declared agent; throws std::invalid_argument on unknown names.
  Role role_of(const std::string& u) const;

  std::set<std::string> low_agents() const;
  std::set<std::string> high_agents() const;

  /// Observation label of agent u in state s; throws on unknown keys.
  const std::string& obs_of(const std::string& s, const std::string& u) const;

  /// Successor of (s, u, a), or nullopt when the transition is undefined.
  std::optional<std::string> successor(const std::string& s, const std::string& u,
                                       const std::string& a) const;

  /// True when every (state, agent, action) triple has a defined successor.
  bool is_total() const;
};

/// Structural equality: declaration order is irrelevant, names are not.
bool structurally_equal(const TransitionNetwork& a, const TransitionNetwork& b);

enum class ViolationKind {
  unknown_initial,
  unknown_state,
  unknown_agent,
  unknown_action,
  unknown_observation,
  duplicate_state,
  duplicate_agent,
  duplicate_action,
  duplicate_observation,
  role_partition,
  missing_observation,
  availability_awareness,
};

struct Violation {
  ViolationKind kind;
  std::string message;
  std::vector<std::string> items;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

const char* to_string(ViolationKind kind);

/// Checks every structural invariant of a network and reports all failures,
/// not just the first one. Violations are data, never exceptions.
ValidationReport validate_network(const TransitionNetwork& net);

/// Actions of u with a defined transition at s. For total networks this is
/// the whole action set. Throws std::invalid_argument on unknown state/agent.
std::set<std::string> available_actions(const TransitionNetwork& net, const std::string& s,
                                        const std::string& u);

/// Folds the sequence left to right from s; undefined as soon as any step is.
/// exec(net, s, {}) == s.
ExecResult exec(const TransitionNetwork& net, const std::string& s, const ActionSequence& alpha);

/// Order-preserving removal of every item owned by an agent in `agents`.
ActionSequence purge(const ActionSequence& alpha, const std::set<std::string>& agents);

/// Extends the transitions of every agent in U to be total by adding
/// self-loops where undefined; everything else is unchanged.
TransitionNetwork totalize_low(const TransitionNetwork& net, const std::set<std::string>& U);

/// The observation sequence of u along a state path, with consecutive
/// duplicates collapsed. Nonempty for nonempty paths.
std::vector<std::string> reduced_obs(const TransitionNetwork& net,
                                     const std::vector<std::string>& path, const std::string& u);

/// Agents with at least one available action at s.
std::set<std::string> enabled_agents(const TransitionNetwork& net, const std::string& s);

}  // namespace effsec
