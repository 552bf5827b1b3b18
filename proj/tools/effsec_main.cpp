// Command-line front end. Exit codes: 0 = property holds / secure,
// 1 = property violated / insecure, 2 = usage or input error,
// 3 = resource budget exceeded.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "effsec/analysis.hpp"
#include "effsec/errors.hpp"
#include "effsec/games.hpp"
#include "effsec/idealization.hpp"
#include "effsec/noninterference.hpp"
#include "effsec/parser.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitHolds = 0;
constexpr int kExitViolated = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;

struct LoadedModel {
  effsec::ModelDocument doc;
  std::string path;
};

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  effsec::ParseResult result = effsec::parse_model(buffer.str());
  if (!result.ok()) {
    const effsec::ParseError& e = *result.error;
    throw std::invalid_argument(path + ":" + std::to_string(e.line) + ":" +
                                std::to_string(e.column) + ": " + e.message);
  }
  return {std::move(*result.document), path};
}

effsec::Goal resolve_goal(const effsec::ModelDocument& doc, const std::string& name,
                          const std::string& path) {
  auto it = doc.goals.find(name);
  if (it == doc.goals.end())
    throw std::invalid_argument("no goal named '" + name + "' in " + path);
  return it->second;
}

effsec::Semantics parse_semantics(const std::string& text) {
  if (text == "strict") return effsec::Semantics::strict;
  if (text == "fair") return effsec::Semantics::fair;
  throw std::invalid_argument("semantics must be 'strict' or 'fair'");
}

json sequence_to_json(const effsec::ActionSequence& alpha) {
  json out = json::array();
  for (const effsec::PersonalizedAction& pa : alpha)
    out.push_back(json{{"agent", pa.agent}, {"action", pa.action}});
  return out;
}

json strategy_to_json(const effsec::Strategy& strategy) {
  json assignments = json::object();
  json nodes = json::object();
  std::map<std::string, int> used;
  for (const effsec::StrategyEntry& entry : strategy.entries) {
    std::string key = entry.history;
    int n = used[key]++;
    if (n > 0) key += "#" + std::to_string(n + 1);
    assignments[key] = entry.action;
    nodes[key] = json{{"obs", entry.obs}, {"belief", entry.belief}};
  }
  return json{{"attacker", strategy.attacker}, {"assignments", assignments}, {"nodes", nodes}};
}

json counterexample_to_json(const effsec::Counterexample& ce) {
  auto steps = [](const std::vector<effsec::CounterexampleStep>& v) {
    json out = json::array();
    for (const effsec::CounterexampleStep& s : v)
      out.push_back(json{
          {"agent", s.agent}, {"action", s.action}, {"from", s.from_state}, {"to", s.to_state}});
    return out;
  };
  return json{{"kind", ce.kind}, {"prefix", steps(ce.prefix)}, {"cycle", steps(ce.cycle)}};
}

json goal_to_json(const std::string& name, const effsec::Goal& goal) {
  return json{{"name", name},
              {"kind", goal.kind == effsec::GoalKind::safety ? "safety" : "reachability"},
              {"states", std::vector<std::string>(goal.states.begin(), goal.states.end())}};
}

json es_to_json(const effsec::ESVerdict& es) {
  json out{{"model", es.model}, {"effectivelySecure", es.effectively_secure}};
  if (es.attack_strategy)
    out["attackStrategy"] = strategy_to_json(*es.attack_strategy);
  else
    out["attackStrategy"] = nullptr;
  return out;
}

json unification_to_json(const effsec::ObservationPartition& unification) {
  json blocks = json::array();
  for (const auto& block : unification.blocks) blocks.push_back(block);
  return json{{"blocks", blocks}};
}

void emit(const json& doc, bool as_json, const std::string& text) {
  if (as_json)
    std::cout << doc.dump(2) << "\n";
  else
    std::cout << text;
}

std::string describe_witness(const effsec::NIVerdict& verdict) {
  std::ostringstream out;
  if (verdict.holds) return "";
  if (verdict.exact_witness) {
    const auto& w = *verdict.exact_witness;
    out << "witness: states " << w.state1 << " and " << w.state2
        << " must look alike to " << w.agent << " but show " << w.obs1 << " vs " << w.obs2
        << "\n";
  }
  if (verdict.bounded_witness) {
    const auto& w = *verdict.bounded_witness;
    out << "witness sequence:";
    for (const auto& pa : w.alpha) out << " (" << pa.agent << "," << pa.action << ")";
    out << "\n  " << w.agent << " observes " << w.obs_run << " but " << w.obs_purged
        << " on the purged run\n";
  }
  return out.str();
}

int cmd_validate(const std::string& path, bool as_json) {
  LoadedModel model = load_model(path);
  const effsec::ValidationReport& report = model.doc.warnings;
  json violations = json::array();
  std::ostringstream text;
  for (const effsec::Violation& v : report.violations) {
    violations.push_back(json{{"kind", effsec::to_string(v.kind)},
                              {"message", v.message},
                              {"items", v.items}});
    text << effsec::to_string(v.kind) << ": " << v.message << "\n";
  }
  if (report.ok()) text << "well-formed: " << model.doc.network.name << "\n";
  emit(json{{"model", model.doc.network.name},
            {"wellFormed", report.ok()},
            {"violations", violations}},
       as_json, text.str());
  return report.ok() ? kExitHolds : kExitViolated;
}

int cmd_ni(const std::string& path, int depth, bool as_json) {
  LoadedModel model = load_model(path);
  const effsec::TransitionNetwork& net = model.doc.network;
  effsec::NIVerdict exact = effsec::check_ni_exact(net);

  json out{{"model", net.name},
           {"exact",
            json{{"holds", exact.holds},
                 {"witness", exact.exact_witness
                                 ? json{{"state1", exact.exact_witness->state1},
                                        {"state2", exact.exact_witness->state2},
                                        {"agent", exact.exact_witness->agent},
                                        {"obs1", exact.exact_witness->obs1},
                                        {"obs2", exact.exact_witness->obs2}}
                                 : json(nullptr)}}}};
  std::ostringstream text;
  text << "noninterference (exact): " << (exact.holds ? "holds" : "violated") << "\n"
       << describe_witness(exact);

  bool verdict = exact.holds;
  if (depth >= 0) {
    effsec::NIVerdict bounded = effsec::check_ni_bounded(net, depth);
    out["bounded"] =
        json{{"depth", depth},
             {"holds", bounded.holds},
             {"witness", bounded.bounded_witness
                             ? json{{"alpha", sequence_to_json(bounded.bounded_witness->alpha)},
                                    {"agent", bounded.bounded_witness->agent},
                                    {"obsRun", bounded.bounded_witness->obs_run},
                                    {"obsPurged", bounded.bounded_witness->obs_purged}}
                             : json(nullptr)}};
    text << "noninterference (bounded, depth " << depth
         << "): " << (bounded.holds ? "holds" : "violated") << "\n"
         << describe_witness(bounded);
    // The bounded check may miss deep violations but must never contradict a
    // violation it found.
    bool agreement = bounded.holds == exact.holds || (exact.holds == false && bounded.holds);
    if (!bounded.holds && exact.holds) {
      std::cerr << "internal disagreement: bounded found a violation the exact check missed\n";
      verdict = false;
    } else if (bounded.holds && !exact.holds) {
      std::cerr << "note: bounded check at depth " << depth
                << " did not reach the violation found by the exact check\n";
    }
    out["agreement"] = agreement;
  }

  emit(out, as_json, text.str());
  return verdict ? kExitHolds : kExitViolated;
}

int cmd_rstar(const std::string& path, bool as_json) {
  LoadedModel model = load_model(path);
  effsec::StatePartition part = effsec::compute_rstar(model.doc.network);
  json blocks = json::array();
  std::ostringstream text;
  for (const auto& block : part.blocks) {
    blocks.push_back(block);
    text << "{";
    for (std::size_t i = 0; i < block.size(); ++i) text << (i ? " " : "") << block[i];
    text << "}\n";
  }
  emit(json{{"model", model.doc.network.name}, {"blocks", blocks}}, as_json, text.str());
  return kExitHolds;
}

int cmd_idealize(const std::string& path, const std::string& out_path, bool as_json) {
  LoadedModel model = load_model(path);
  effsec::IdealizationResult ideal = effsec::idealize(model.doc.network);
  for (const std::string& w : ideal.warnings) std::cerr << "warning: " << w << "\n";

  effsec::ModelDocument out_doc;
  out_doc.network = ideal.network;
  out_doc.goals = model.doc.goals;
  std::string serialized = effsec::serialize_model(out_doc);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write " + out_path);
    out << serialized;
  }

  json doc{{"model", model.doc.network.name},
           {"provenance",
            ideal.provenance == effsec::IdealizationProvenance::total ? "total" : "ptn"},
           {"unification", unification_to_json(ideal.unification)},
           {"warnings", ideal.warnings},
           {"output", out_path.empty() ? json(nullptr) : json(out_path)}};
  std::ostringstream text;
  text << "unification:\n";
  for (const auto& block : ideal.unification.blocks) {
    if (block.size() < 2) continue;
    text << "  {";
    for (std::size_t i = 0; i < block.size(); ++i) text << (i ? " " : "") << block[i];
    text << "}\n";
  }
  if (out_path.empty() && !as_json) text << serialized;
  emit(doc, as_json, text.str());
  return kExitHolds;
}

int cmd_solve(const std::string& path, const std::string& goal_name, const std::string& attacker,
              const std::string& semantics_name, std::uint64_t budget,
              const std::string& dot_path, bool as_json) {
  LoadedModel model = load_model(path);
  effsec::Goal goal = resolve_goal(model.doc, goal_name, path);
  effsec::Semantics semantics = parse_semantics(semantics_name);
  effsec::BeliefArena arena = effsec::build_belief_arena(model.doc.network, attacker);
  if (!dot_path.empty()) {
    std::ofstream out(dot_path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write " + dot_path);
    out << effsec::arena_to_dot(arena);
  }
  effsec::SolveResult result =
      semantics == effsec::Semantics::strict
          ? effsec::solve_strict(arena, goal)
          : effsec::solve_fair(model.doc.network, arena, goal, {budget});

  json out{{"model", model.doc.network.name},
           {"goal", goal_to_json(goal_name, goal)},
           {"attacker", attacker},
           {"semantics", effsec::to_string(semantics)},
           {"winning", result.winning},
           {"strategy", result.strategy ? strategy_to_json(*result.strategy) : json(nullptr)},
           {"counterexample", result.counterexample
                                  ? counterexample_to_json(*result.counterexample)
                                  : json(nullptr)}};
  std::ostringstream text;
  text << "winning=" << (result.winning ? "true" : "false") << " (" << semantics_name << ")\n";
  if (result.strategy)
    for (const effsec::StrategyEntry& e : result.strategy->entries)
      text << "  at " << e.obs << " play " << e.action << "\n";
  emit(out, as_json, text.str());
  return result.winning ? kExitViolated : kExitHolds;
}

int cmd_effsec(const std::string& path, const std::string& goal_name,
               const std::string& attacker, const std::string& semantics_name,
               std::uint64_t budget, bool as_json) {
  auto t0 = std::chrono::steady_clock::now();
  LoadedModel model = load_model(path);
  effsec::Goal goal = resolve_goal(model.doc, goal_name, path);
  effsec::Semantics semantics = parse_semantics(semantics_name);
  effsec::InfoSecReport report =
      effsec::effective_info_security(model.doc.network, attacker, goal, semantics, {budget});
  auto t1 = std::chrono::steady_clock::now();
  double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  effsec::ModelDocument ideal_doc;
  ideal_doc.network = report.idealization.network;
  ideal_doc.goals = model.doc.goals;

  json strategies = json::object();
  strategies["attack"] = report.es.attack_strategy
                             ? strategy_to_json(*report.es.attack_strategy)
                             : json(nullptr);
  strategies["attackIdeal"] = report.es_ideal.attack_strategy
                                  ? strategy_to_json(*report.es_ideal.attack_strategy)
                                  : json(nullptr);

  json out{{"model", model.doc.network.name},
           {"idealizedModel",
            json{{"name", report.idealization.network.name},
                 {"provenance", report.idealization.provenance ==
                                        effsec::IdealizationProvenance::total
                                    ? "total"
                                    : "ptn"},
                 {"tn", effsec::serialize_model(ideal_doc)}}},
           {"unification", unification_to_json(report.idealization.unification)},
           {"goal", goal_to_json(goal_name, goal)},
           {"semantics", effsec::to_string(semantics)},
           {"es", es_to_json(report.es)},
           {"esIdeal", es_to_json(report.es_ideal)},
           {"relation",
            json{{"strictlyLess", report.relation.strictly_less},
                 {"atLeastAs", report.relation.at_least_as},
                 {"equivalent", report.relation.equivalent}}},
           {"verdict", report.effectively_information_secure},
           {"strategies", strategies},
           {"timingsMs", json{{"total", ms}}}};

  std::ostringstream text;
  text << "effectively information-secure: "
       << (report.effectively_information_secure ? "yes" : "no") << "\n"
       << "  ES(" << model.doc.network.name
       << ") = " << (report.es.effectively_secure ? "secure" : "insecure") << "\n"
       << "  ES(" << report.idealization.network.name
       << ") = " << (report.es_ideal.effectively_secure ? "secure" : "insecure") << "\n";
  if (report.es.attack_strategy) {
    text << "  attack strategy:\n";
    for (const effsec::StrategyEntry& e : report.es.attack_strategy->entries)
      text << "    at " << e.obs << " play " << e.action << "\n";
  }
  emit(out, as_json, text.str());
  return report.effectively_information_secure ? kExitHolds : kExitViolated;
}

int cmd_compare(const std::string& path_a, const std::string& path_b,
                const std::string& goal_name, const std::string& attacker,
                const std::string& semantics_name, std::uint64_t budget, bool as_json) {
  LoadedModel a = load_model(path_a);
  LoadedModel b = load_model(path_b);
  effsec::Goal goal_a = resolve_goal(a.doc, goal_name, path_a);
  effsec::Goal goal_b = resolve_goal(b.doc, goal_name, path_b);
  effsec::Semantics semantics = parse_semantics(semantics_name);
  effsec::ComparisonVerdict verdict = effsec::compare_security(
      a.doc.network, goal_a, b.doc.network, goal_b, attacker, semantics, {budget});

  json out{{"modelA", a.doc.network.name},
           {"modelB", b.doc.network.name},
           {"goal", goal_to_json(goal_name, goal_a)},
           {"semantics", effsec::to_string(semantics)},
           {"esA", es_to_json(verdict.first)},
           {"esB", es_to_json(verdict.second)},
           {"relation",
            json{{"strictlyLess", verdict.strictly_less},
                 {"atLeastAs", verdict.at_least_as},
                 {"equivalent", verdict.equivalent}}}};
  std::ostringstream text;
  text << a.doc.network.name << (verdict.equivalent ? " ~ " : " !~ ") << b.doc.network.name
       << "\n"
       << "  strictlyLess(" << a.doc.network.name << ", " << b.doc.network.name
       << ") = " << (verdict.strictly_less ? "true" : "false") << "\n"
       << "  atLeastAs(" << a.doc.network.name << ", " << b.doc.network.name
       << ") = " << (verdict.at_least_as ? "true" : "false") << "\n";
  emit(out, as_json, text.str());
  return verdict.equivalent ? kExitHolds : kExitViolated;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"effsec: effective information-flow security analysis for multi-agent "
               "transition networks"};
  app.require_subcommand(1);

  bool as_json = false;
  app.add_flag("--json", as_json, "emit one JSON document on stdout");

  std::string path, path_b, goal_name = "Gsys", attacker = "L", semantics = "fair";
  std::string out_path, dot_path;
  int depth = -1;
  std::uint64_t budget = 200000;

  CLI::App* validate = app.add_subcommand("validate", "check structural well-formedness");
  validate->add_option("model", path, "input .tn file")->required();

  CLI::App* ni = app.add_subcommand("ni", "decide noninterference");
  ni->add_option("model", path, "input .tn file")->required();
  ni->add_option("--depth", depth, "also run the bounded sequence check up to this depth");

  CLI::App* rstar = app.add_subcommand("rstar", "print the state indistinguishability blocks");
  rstar->add_option("model", path, "input .tn file")->required();

  CLI::App* idealize = app.add_subcommand("idealize", "compute the noninterferent idealized variant");
  idealize->add_option("model", path, "input .tn file")->required();
  idealize->add_option("-o,--output", out_path, "write the idealized model here");

  CLI::App* solve = app.add_subcommand("solve", "solve the attacker's game for a named goal");
  solve->add_option("model", path, "input .tn file")->required();
  solve->add_option("--goal", goal_name, "goal name (default Gsys)");
  solve->add_option("--attacker", attacker, "attacking low agent (default L)");
  solve->add_option("--semantics", semantics, "strict|fair (default fair)");
  solve->add_option("--budget", budget, "strategy-enumeration budget");
  solve->add_option("--dot", dot_path, "write the belief arena as DOT");

  CLI::App* effsec_cmd = app.add_subcommand("effsec", "decide effective information security");
  effsec_cmd->add_option("model", path, "input .tn file")->required();
  effsec_cmd->add_option("--goal", goal_name, "goal name (default Gsys)");
  effsec_cmd->add_option("--attacker", attacker, "attacking low agent (default L)");
  effsec_cmd->add_option("--semantics", semantics, "strict|fair (default fair)");
  effsec_cmd->add_option("--budget", budget, "strategy-enumeration budget");

  CLI::App* compare = app.add_subcommand("compare", "compare the effective security of two models");
  compare->add_option("modelA", path, "first .tn file")->required();
  compare->add_option("modelB", path_b, "second .tn file")->required();
  compare->add_option("--goal", goal_name, "goal name present in both documents");
  compare->add_option("--attacker", attacker, "attacking low agent (default L)");
  compare->add_option("--semantics", semantics, "strict|fair (default fair)");
  compare->add_option("--budget", budget, "strategy-enumeration budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(path, as_json);
    if (ni->parsed()) return cmd_ni(path, depth, as_json);
    if (rstar->parsed()) return cmd_rstar(path, as_json);
    if (idealize->parsed()) return cmd_idealize(path, out_path, as_json);
    if (solve->parsed())
      return cmd_solve(path, goal_name, attacker, semantics, budget, dot_path, as_json);
    if (effsec_cmd->parsed())
      return cmd_effsec(path, goal_name, attacker, semantics, budget, as_json);
    if (compare->parsed())
      return cmd_compare(path, path_b, goal_name, attacker, semantics, budget, as_json);
  } catch (const effsec::BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
