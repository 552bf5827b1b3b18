#include "effsec/analysis.hpp"

#include <stdexcept>

namespace effsec {

namespace {

SolveResult solve(const TransitionNetwork& net, const std::string& attacker, const Goal& goal,
                  Semantics semantics, const SolveOptions& options) {
  BeliefArena arena = build_belief_arena(net, attacker);
  if (semantics == Semantics::strict) return solve_strict(arena, goal);
  return solve_fair(net, arena, goal, options);
}

}  // namespace

ESVerdict effective_security(const TransitionNetwork& net, const std::string& attacker,
                             const Goal& goal, Semantics semantics,
                             const SolveOptions& options) {
  for (const std::string& s : goal.states)
    if (!net.has_state(s)) throw std::invalid_argument("goal names unknown state " + s);

  SolveResult attack = solve(net, attacker, negate_goal(goal), semantics, options);
  ESVerdict verdict;
  verdict.model = net.name;
  verdict.goal = goal;
  verdict.semantics = semantics;
  verdict.effectively_secure = !attack.winning;
  if (attack.winning) verdict.attack_strategy = attack.strategy;
  return verdict;
}

ComparisonVerdict compare_security(const TransitionNetwork& first, const Goal& first_goal,
                                   const TransitionNetwork& second, const Goal& second_goal,
                                   const std::string& attacker, Semantics semantics,
                                   const SolveOptions& options) {
  ComparisonVerdict verdict;
  verdict.first = effective_security(first, attacker, first_goal, semantics, options);
  verdict.second = effective_security(second, attacker, second_goal, semantics, options);
  bool es1 = verdict.first.effectively_secure;
  bool es2 = verdict.second.effectively_secure;
  verdict.strictly_less = es2 && !es1;
  verdict.at_least_as = !es1 || es2;
  verdict.equivalent = es1 == es2;
  return verdict;
}

InfoSecReport effective_info_security(const TransitionNetwork& net, const std::string& attacker,
                                      const Goal& goal, Semantics semantics,
                                      const SolveOptions& options) {
  InfoSecReport report;
  report.attacker = attacker;
  report.semantics = semantics;
  report.idealization = idealize(net);
  report.relation = compare_security(net, goal, report.idealization.network, goal, attacker,
                                     semantics, options);
  report.es = report.relation.first;
  report.es_ideal = report.relation.second;
  report.effectively_information_secure = report.relation.equivalent;
  return report;
}

DominanceReport check_ideal_dominance(const TransitionNetwork& net, const std::string& attacker,
                                      const Goal& goal, Semantics semantics,
                                      const SolveOptions& options) {
  DominanceReport report;
  report.total = net.is_total();
  report.safety_goal = goal.kind == GoalKind::safety;
  report.non_low_enabled_everywhere = true;
  const auto low = net.low_agents();
  for (const std::string& s : net.states) {
    bool some_non_low = false;
    for (const AgentDecl& u : net.agents) {
      if (low.count(u.name)) continue;
      if (!available_actions(net, s, u.name).empty()) {
        some_non_low = true;
        break;
      }
    }
    if (!some_non_low) {
      report.non_low_enabled_everywhere = false;
      break;
    }
  }
  report.hypotheses_met =
      report.total || report.non_low_enabled_everywhere || report.safety_goal;

  IdealizationResult ideal = idealize(net);
  report.relation =
      compare_security(net, goal, ideal.network, goal, attacker, semantics, options);
  report.ideal_at_least_as_secure = report.relation.at_least_as;
  return report;
}

}  // namespace effsec
