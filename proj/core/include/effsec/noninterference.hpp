#pragma once

#include <optional>
#include <string>
#include <vector>

#include "effsec/model.hpp"

namespace effsec {

/// An equivalence relation over the states of one network, kept in canonical
/// form: blocks ordered by their first member's declaration index, members in
/// declaration order.
struct StatePartition {
  std::vector<std::vector<std::string>> blocks;

  bool related(const std::string& a, const std::string& b) const;
  const std::vector<std::string>* block_of(const std::string& s) const;

  /// Every block of *this lies inside one block of `coarser`.
  bool refines(const StatePartition& coarser) const;

  friend bool operator==(const StatePartition&, const StatePartition&) = default;
};

/// Canonicalizes an arbitrary list of blocks against a network's state order.
StatePartition make_partition(const TransitionNetwork& net,
                              const std::vector<std::vector<std::string>>& blocks);

/// The least equivalence relation that contains every pair {s, do(s,h,a)} for
/// high h and defined a, closed under propagation along low actions defined on
/// both sides of an already related pair. Computed by union-find with a
/// worklist; the result is the unique least fixpoint regardless of order.
StatePartition compute_rstar(const TransitionNetwork& net);

struct OCCounterexample {
  std::string state1, state2, agent, obs1, obs2;
};
struct SCCounterexample {
  std::string state1, state2, agent, action, target1, target2;
};
struct LRCounterexample {
  std::string state, agent, action, target;
};

/// Output consistency / step consistency / local respect of a candidate
/// partition, each with an explicit counterexample when false. Step
/// consistency is checked where the low action is defined at both related
/// states, matching the partial-network reading used by compute_rstar.
struct UnwindingReport {
  bool oc = true, sc = true, lr = true;
  std::optional<OCCounterexample> oc_witness;
  std::optional<SCCounterexample> sc_witness;
  std::optional<LRCounterexample> lr_witness;

  bool all() const { return oc && sc && lr; }
};

UnwindingReport check_unwinding(const TransitionNetwork& net, const StatePartition& part);

enum class NIMethod { exact, bounded };

struct NIExactWitness {
  std::string state1, state2, agent, obs1, obs2;
};

struct NIBoundedWitness {
  ActionSequence alpha;
  std::string agent;
  std::string obs_run;     // low observation after alpha
  std::string obs_purged;  // low observation after the purged run
};

struct NIVerdict {
  bool holds = false;
  NIMethod method = NIMethod::exact;
  int depth = -1;  // bounded method only
  std::optional<NIExactWitness> exact_witness;
  std::optional<NIBoundedWitness> bounded_witness;
};

/// Decides noninterference structurally: it holds exactly when every low
/// agent's observation is constant on each block of compute_rstar. Polynomial.
NIVerdict check_ni_exact(const TransitionNetwork& net);

/// Decides the purge-based definition restricted to sequences of length <=
/// depth: no executable alpha may give a low agent a different observation
/// than its high-purged counterpart. Comparisons whose purged run is undefined
/// are vacuous. Implemented as a breadth-first search over (run, purged-run)
/// state pairs with moves explored in declaration order, so the reported
/// witness is a shortest one and deterministic.
NIVerdict check_ni_bounded(const TransitionNetwork& net, int depth);

/// Re-evaluates a bounded witness through exec/purge/obs.
struct WitnessReplay {
  bool executable = false;  // exec(alpha) defined
  bool purged_defined = false;
  std::string obs_run, obs_purged;
  bool violates = false;
};

WitnessReplay replay_ni_witness(const TransitionNetwork& net, const ActionSequence& alpha,
                                const std::string& low_agent);

}  // namespace effsec
