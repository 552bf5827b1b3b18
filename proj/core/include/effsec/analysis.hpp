#pragma once

#include <optional>
#include <string>

#include "effsec/games.hpp"
#include "effsec/goal.hpp"
#include "effsec/idealization.hpp"
#include "effsec/model.hpp"

namespace effsec {

/// Whether the attacker lacks a surely winning strategy against the system
/// goal; the attack strategy is attached exactly when it does not.
struct ESVerdict {
  bool effectively_secure = false;
  std::optional<Strategy> attack_strategy;
  std::string model;
  Goal goal;
  Semantics semantics = Semantics::fair;
};

struct ComparisonVerdict {
  bool strictly_less = false;  // first model strictly less effectively secure
  bool at_least_as = false;    // second model at least as effectively secure
  bool equivalent = false;
  ESVerdict first;
  ESVerdict second;
};

ESVerdict effective_security(const TransitionNetwork& net, const std::string& attacker,
                             const Goal& goal, Semantics semantics,
                             const SolveOptions& options = {});

/// Compares two models under one goal (resolved by state names in each).
ComparisonVerdict compare_security(const TransitionNetwork& first, const Goal& first_goal,
                                   const TransitionNetwork& second, const Goal& second_goal,
                                   const std::string& attacker, Semantics semantics,
                                   const SolveOptions& options = {});

/// The full evidence chain for effective information security: the model is
/// secure exactly when it is effectively equivalent to its idealized variant.
struct InfoSecReport {
  bool effectively_information_secure = false;
  ESVerdict es;
  ESVerdict es_ideal;
  ComparisonVerdict relation;  // first = model, second = idealized variant
  IdealizationResult idealization;
  std::string attacker;
  Semantics semantics = Semantics::fair;
};

InfoSecReport effective_info_security(const TransitionNetwork& net, const std::string& attacker,
                                      const Goal& goal, Semantics semantics,
                                      const SolveOptions& options = {});

/// Checks the idealization-dominance statement: the idealized variant is at
/// least as effectively secure as the original. The hypotheses under which
/// this is guaranteed (total network; or a non-low agent enabled everywhere;
/// or a safety goal) are evaluated and reported separately from the relation.
struct DominanceReport {
  bool total = false;
  bool non_low_enabled_everywhere = false;
  bool safety_goal = false;
  bool hypotheses_met = false;
  bool ideal_at_least_as_secure = false;
  ComparisonVerdict relation;  // first = model, second = idealized variant
};

DominanceReport check_ideal_dominance(const TransitionNetwork& net, const std::string& attacker,
                                      const Goal& goal, Semantics semantics,
                                      const SolveOptions& options = {});

}  // namespace effsec
