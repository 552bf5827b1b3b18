#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "effsec/model.hpp"
#include "effsec/noninterference.hpp"

namespace effsec {

/// An equivalence relation over observation labels, canonical like
/// StatePartition: blocks ordered by first member's declaration index.
struct ObservationPartition {
  std::vector<std::vector<std::string>> blocks;

  bool related(const std::string& a, const std::string& b) const;
  const std::vector<std::string>* block_of(const std::string& o) const;
  bool is_identity() const;

  /// Deterministic name of the block containing o: the label itself for
  /// singletons, "{a+b+c}" with sorted members otherwise.
  std::string block_name(const std::string& o) const;

  /// True when *this, read as a set of label pairs, is a (not necessarily
  /// strict) subset of `coarser`.
  bool contained_in(const ObservationPartition& coarser) const;

  friend bool operator==(const ObservationPartition&, const ObservationPartition&) = default;
};

ObservationPartition make_observation_partition(
    const TransitionNetwork& net, const std::vector<std::vector<std::string>>& blocks);

/// The minimal unification: the equivalence closure over the label set of
/// { (obs(s1,l), obs(s2,l)) | (s1,s2) related by compute_rstar, l low }.
/// Labels no low agent links stay in singleton blocks.
ObservationPartition compute_ustar(const TransitionNetwork& net);

/// Rewrites every agent's observations to the containing block's name. States,
/// agents, actions and transitions are untouched.
TransitionNetwork apply_unification(const TransitionNetwork& net,
                                    const ObservationPartition& unification);

enum class IdealizationProvenance { total, ptn };

struct IdealizationResult {
  TransitionNetwork network;
  ObservationPartition unification;
  IdealizationProvenance provenance = IdealizationProvenance::total;
  /// Set when unifying observation labels shared with high agents broke their
  /// availability-awareness; informational only.
  std::vector<std::string> warnings;
};

/// The unique noninterferent variant with the least observation blurring.
/// Total networks are unified directly; partial ones are first made total for
/// the low agents (self-loops), then unified.
IdealizationResult idealize(const TransitionNetwork& net);

struct MinimalityReport {
  bool minimal = false;
  std::uint64_t refinements_checked = 0;
  /// A strict refinement that still yields noninterference, when one exists.
  std::optional<ObservationPartition> counterexample;
};

/// Exhaustively re-checks minimality of a unification by applying every strict
/// refinement (finest first) and testing noninterference on the result. A
/// desk-scale verification tool; throws BudgetError when the refinement count
/// exceeds `budget`.
MinimalityReport check_minimality(const TransitionNetwork& net,
                                  const ObservationPartition& unification,
                                  std::uint64_t budget = 20000);

}  // namespace effsec
