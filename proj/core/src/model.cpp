#include "effsec/model.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace effsec {

namespace {

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

bool TransitionNetwork::has_state(const std::string& s) const { return contains(states, s); }

bool TransitionNetwork::has_agent(const std::string& u) const {
  return std::any_of(agents.begin(), agents.end(),
                     [&](const AgentDecl& a) { return a.name == u; });
}

bool TransitionNetwork::has_action(const std::string& a) const { return contains(actions, a); }

bool TransitionNetwork::has_observation(const std::string& o) const {
  return contains(observations, o);
}

Role TransitionNetwork::role_of(const std::string& u) const {
  for (const AgentDecl& a : agents)
    if (a.name == u) return a.role;
  throw std::invalid_argument("unknown agent: " + u);
}

std::set<std::string> TransitionNetwork::low_agents() const {
  std::set<std::string> out;
  for (const AgentDecl& a : agents)
    if (a.role == Role::low) out.insert(a.name);
  return out;
}

std::set<std::string> TransitionNetwork::high_agents() const {
  std::set<std::string> out;
  for (const AgentDecl& a : agents)
    if (a.role == Role::high) out.insert(a.name);
  return out;
}

const std::string& TransitionNetwork::obs_of(const std::string& s, const std::string& u) const {
  auto it = obs.find({s, u});
  if (it == obs.end())
    throw std::invalid_argument("no observation for (" + s + ", " + u + ")");
  return it->second;
}

std::optional<std::string> TransitionNetwork::successor(const std::string& s,
                                                        const std::string& u,
                                                        const std::string& a) const {
  auto it = transitions.find({s, u, a});
  if (it == transitions.end()) return std::nullopt;
  return it->second;
}

bool TransitionNetwork::is_total() const {
  for (const std::string& s : states)
    for (const AgentDecl& u : agents)
      for (const std::string& a : actions)
        if (!transitions.count({s, u.name, a})) return false;
  return true;
}

bool structurally_equal(const TransitionNetwork& a, const TransitionNetwork& b) {
  auto sorted = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  auto agent_pairs = [](const TransitionNetwork& n) {
    std::set<std::pair<std::string, bool>> out;
    for (const AgentDecl& u : n.agents) out.insert({u.name, u.role == Role::low});
    return out;
  };
  return a.name == b.name && a.initial == b.initial && sorted(a.states) == sorted(b.states) &&
         sorted(a.actions) == sorted(b.actions) &&
         sorted(a.observations) == sorted(b.observations) && agent_pairs(a) == agent_pairs(b) &&
         a.obs == b.obs && a.transitions == b.transitions;
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::unknown_initial: return "unknown-initial";
    case ViolationKind::unknown_state: return "unknown-state";
    case ViolationKind::unknown_agent: return "unknown-agent";
    case ViolationKind::unknown_action: return "unknown-action";
    case ViolationKind::unknown_observation: return "unknown-observation";
    case ViolationKind::duplicate_state: return "duplicate-state";
    case ViolationKind::duplicate_agent: return "duplicate-agent";
    case ViolationKind::duplicate_action: return "duplicate-action";
    case ViolationKind::duplicate_observation: return "duplicate-observation";
    case ViolationKind::role_partition: return "role-partition";
    case ViolationKind::missing_observation: return "missing-observation";
    case ViolationKind::availability_awareness: return "availability-awareness";
  }
  return "unknown";
}

ValidationReport validate_network(const TransitionNetwork& net) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::string message, std::vector<std::string> items = {}) {
    report.violations.push_back({kind, std::move(message), std::move(items)});
  };

  auto report_duplicates = [&](const std::vector<std::string>& names, ViolationKind kind,
                               const char* what) {
    std::set<std::string> seen, reported;
    for (const std::string& n : names) {
      if (!seen.insert(n).second && reported.insert(n).second)
        add(kind, std::string(what) + " declared more than once: " + n, {n});
    }
  };
  report_duplicates(net.states, ViolationKind::duplicate_state, "state");
  report_duplicates(net.actions, ViolationKind::duplicate_action, "action");
  report_duplicates(net.observations, ViolationKind::duplicate_observation, "observation");

  // An agent listed under both roles breaks the High/Low partition; listed
  // twice under one role it is merely a duplicate.
  std::map<std::string, std::set<bool>> roles_seen;
  for (const AgentDecl& u : net.agents) roles_seen[u.name].insert(u.role == Role::low);
  for (const auto& [name, roles] : roles_seen) {
    if (roles.size() > 1)
      add(ViolationKind::role_partition, "agent " + name + " is declared both high and low",
          {name});
  }
  {
    std::set<std::string> seen, reported;
    for (const AgentDecl& u : net.agents) {
      if (!seen.insert(u.name).second && roles_seen[u.name].size() == 1 &&
          reported.insert(u.name).second)
        add(ViolationKind::duplicate_agent, "agent declared more than once: " + u.name, {u.name});
    }
  }

  if (!net.has_state(net.initial))
    add(ViolationKind::unknown_initial, "initial state " + net.initial + " is not declared",
        {net.initial});

  for (const auto& [key, label] : net.obs) {
    const auto& [s, u] = key;
    if (!net.has_state(s))
      add(ViolationKind::unknown_state, "observation entry for undeclared state " + s, {s});
    if (!net.has_agent(u))
      add(ViolationKind::unknown_agent, "observation entry for undeclared agent " + u, {u});
    if (!net.has_observation(label))
      add(ViolationKind::unknown_observation, "undeclared observation label " + label, {label});
  }
  for (const std::string& s : net.states) {
    for (const AgentDecl& u : net.agents) {
      if (!net.obs.count({s, u.name}))
        add(ViolationKind::missing_observation,
            "no observation for (" + s + ", " + u.name + ")", {s, u.name});
    }
  }

  for (const auto& [key, target] : net.transitions) {
    const auto& [s, u, a] = key;
    if (!net.has_state(s))
      add(ViolationKind::unknown_state, "transition from undeclared state " + s, {s});
    if (!net.has_state(target))
      add(ViolationKind::unknown_state, "transition to undeclared state " + target, {target});
    if (!net.has_agent(u))
      add(ViolationKind::unknown_agent, "transition by undeclared agent " + u, {u});
    if (!net.has_action(a))
      add(ViolationKind::unknown_action, "transition with undeclared action " + a, {a});
  }

  // Availability-awareness: equal observations imply equal repertoires.
  // Only meaningful once the observation map itself is consistent.
  if (std::none_of(report.violations.begin(), report.violations.end(), [](const Violation& v) {
        return v.kind == ViolationKind::missing_observation ||
               v.kind == ViolationKind::unknown_state || v.kind == ViolationKind::unknown_agent;
      })) {
    auto act_of = [&](const std::string& s, const std::string& u) {
      std::set<std::string> out;
      for (const std::string& a : net.actions)
        if (net.transitions.count({s, u, a})) out.insert(a);
      return out;
    };
    for (const AgentDecl& u : net.agents) {
      for (std::size_t i = 0; i < net.states.size(); ++i) {
        for (std::size_t j = i + 1; j < net.states.size(); ++j) {
          const std::string& s1 = net.states[i];
          const std::string& s2 = net.states[j];
          if (net.obs_of(s1, u.name) != net.obs_of(s2, u.name)) continue;
          auto a1 = act_of(s1, u.name);
          auto a2 = act_of(s2, u.name);
          if (a1 != a2) {
            std::ostringstream msg;
            msg << "agent " << u.name << " observes " << net.obs_of(s1, u.name) << " in both "
                << s1 << " and " << s2 << " but has actions {"
                << join({a1.begin(), a1.end()}, ", ") << "} vs {"
                << join({a2.begin(), a2.end()}, ", ") << "}";
            add(ViolationKind::availability_awareness, msg.str(), {s1, s2, u.name});
          }
        }
      }
    }
  }

  return report;
}

std::set<std::string> available_actions(const TransitionNetwork& net, const std::string& s,
                                        const std::string& u) {
  if (!net.has_state(s)) throw std::invalid_argument("unknown state: " + s);
  if (!net.has_agent(u)) throw std::invalid_argument("unknown agent: " + u);
  std::set<std::string> out;
  for (const std::string& a : net.actions)
    if (net.transitions.count({s, u, a})) out.insert(a);
  return out;
}

ExecResult exec(const TransitionNetwork& net, const std::string& s, const ActionSequence& alpha) {
  if (!net.has_state(s)) throw std::invalid_argument("unknown state: " + s);
  std::string current = s;
  for (const PersonalizedAction& pa : alpha) {
    if (!net.has_agent(pa.agent)) throw std::invalid_argument("unknown agent: " + pa.agent);
    if (!net.has_action(pa.action)) throw std::invalid_argument("unknown action: " + pa.action);
    auto next = net.successor(current, pa.agent, pa.action);
    if (!next) return std::nullopt;
    current = *next;
  }
  return current;
}

ActionSequence purge(const ActionSequence& alpha, const std::set<std::string>& agents) {
  ActionSequence out;
  for (const PersonalizedAction& pa : alpha)
    if (!agents.count(pa.agent)) out.push_back(pa);
  return out;
}

TransitionNetwork totalize_low(const TransitionNetwork& net, const std::set<std::string>& U) {
  for (const std::string& u : U)
    if (!net.has_agent(u)) throw std::invalid_argument("unknown agent: " + u);
  TransitionNetwork out = net;
  for (const std::string& s : net.states)
    for (const std::string& u : U)
      for (const std::string& a : net.actions)
        out.transitions.emplace(std::make_tuple(s, u, a), s);  // keeps existing entries
  return out;
}

std::vector<std::string> reduced_obs(const TransitionNetwork& net,
                                     const std::vector<std::string>& path,
                                     const std::string& u) {
  std::vector<std::string> out;
  for (const std::string& s : path) {
    const std::string& label = net.obs_of(s, u);
    if (out.empty() || out.back() != label) out.push_back(label);
  }
  return out;
}

std::set<std::string> enabled_agents(const TransitionNetwork& net, const std::string& s) {
  std::set<std::string> out;
  for (const AgentDecl& u : net.agents)
    if (!available_actions(net, s, u.name).empty()) out.insert(u.name);
  return out;
}

}  // namespace effsec
