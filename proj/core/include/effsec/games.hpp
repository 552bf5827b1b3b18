#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "effsec/goal.hpp"
#include "effsec/model.hpp"

namespace effsec {

enum class Semantics { strict, fair };

const char* to_string(Semantics semantics);

/// One observable step out of (node, action): some actor's move changed the
/// attacker's observation.
struct ArenaOutcome {
  std::string actor;
  std::string action;
  std::string from_state;
  std::string to_state;
  std::string new_obs;
  int successor = -1;
};

/// Everything the solvers need about playing one action at one node. The
/// closure extends the node's belief with the states reachable by moves that
/// keep the attacker's observation unchanged (other agents' moves, plus the
/// chosen action's own silent moves).
struct ArenaActionEval {
  std::optional<std::string> action;  // nullopt when the attacker has no action
  std::vector<std::string> closure;
  bool stutter_cycle = false;  // the adversary can keep the play silent forever
  bool deadlock = false;       // some closure state has no move at all
  std::vector<ArenaOutcome> outcomes;
  std::map<std::string, int> successor_by_obs;
};

struct ArenaNode {
  std::vector<std::string> belief;  // states sharing the attacker's observation
  std::string obs;
  std::string history;  // shortest reduced-observation history reaching here
  std::set<std::string> actions;
  std::vector<ArenaActionEval> evals;  // one per action, lexicographic; one entry when empty
  std::map<std::string, std::set<std::string>> enabled;  // belief state -> enabled agents
};

/// The attacker's knowledge game graph. Nodes are observation-consistent
/// belief sets; construction is deterministic for a given network.
struct BeliefArena {
  std::string attacker;
  int initial = 0;
  std::vector<ArenaNode> nodes;
  std::map<std::string, std::string> state_obs;  // every state's attacker observation

  const ArenaActionEval& eval_of(int node, const std::optional<std::string>& action) const;
  int find_node(const std::vector<std::string>& belief) const;
};

/// Builds the reachable arena for one low attacker; every other agent is part
/// of the adversarial environment. Throws std::invalid_argument when the
/// attacker is unknown or not low, or the network is malformed.
BeliefArena build_belief_arena(const TransitionNetwork& net, const std::string& attacker);

struct StrategyEntry {
  std::vector<std::string> belief;
  std::string obs;
  std::string history;
  std::string action;
};

/// A deterministic belief-positional strategy: one action per arena node,
/// keyed by the belief itself so it can be checked without the arena.
struct Strategy {
  std::string attacker;
  std::vector<StrategyEntry> entries;

  const StrategyEntry* find(const std::vector<std::string>& belief) const;
};

struct CounterexampleStep {
  std::string agent, action, from_state, to_state;
};

/// A losing behavior: a finite prefix from the initial state, optionally
/// followed by a cycle (lasso). Replays through exec.
struct Counterexample {
  std::string kind;  // deadlock | fair-cycle | cycle | safety-violation
  std::vector<CounterexampleStep> prefix;
  std::vector<CounterexampleStep> cycle;
};

struct SolveResult {
  bool winning = false;
  Semantics semantics = Semantics::strict;
  std::optional<Strategy> strategy;       // present iff winning
  std::optional<int> losing_node;         // arena node witnessing the loss
  std::optional<Counterexample> counterexample;
};

/// Sure winning against a fully adversarial scheduler (it may stall other
/// agents forever and interleave any defined moves). Reachability targets must
/// be unions of the attacker's observation classes.
SolveResult solve_strict(const BeliefArena& arena, const Goal& goal);

struct SolveOptions {
  std::uint64_t budget = 200000;  // candidate evaluations in the fair search
};

/// Winning over fair behaviors: on every fair infinite path and every maximal
/// finite path of the strategy-trimmed system the goal holds, where a path is
/// fair when no agent that stays enabled acts only finitely often. Decided by
/// enumerating belief-positional strategies in lexicographic order and
/// model-checking each candidate's product graph.
SolveResult solve_fair(const TransitionNetwork& net, const BeliefArena& arena, const Goal& goal,
                       const SolveOptions& options = {});

struct VerificationResult {
  bool ok = false;
  std::string detail;
  std::optional<Counterexample> counterexample;
};

/// Independent witness checker: rebuilds the strategy-trimmed product from
/// the network alone and model-checks the goal under the given semantics,
/// sharing no code with the solvers' win computations.
VerificationResult verify_strategy(const TransitionNetwork& net, const Strategy& strategy,
                                   const Goal& goal, Semantics semantics);

std::string arena_to_dot(const BeliefArena& arena);

/// The strategy-trimmed product graph (state x belief) in DOT form.
std::string product_to_dot(const TransitionNetwork& net, const Strategy& strategy);

}  // namespace effsec
