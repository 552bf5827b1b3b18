#include "effsec/noninterference.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <stdexcept>

namespace effsec {

namespace {

struct UnionFind {
  std::vector<int> parent;

  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }

  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  // Returns true when the call actually merged two classes. The smaller root
  // index wins, which keeps block representatives deterministic.
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a > b) std::swap(a, b);
    parent[b] = a;
    return true;
  }
};

struct Indexed {
  const TransitionNetwork& net;
  std::map<std::string, int> state_index;
  std::vector<std::string> low, high;
  // successor[s][u-slot][a] for low agents, -1 when undefined
  std::vector<std::vector<std::vector<int>>> low_succ;
  std::vector<std::vector<std::vector<int>>> high_succ;

  explicit Indexed(const TransitionNetwork& n) : net(n) {
    for (std::size_t i = 0; i < n.states.size(); ++i)
      state_index.emplace(n.states[i], static_cast<int>(i));
    for (const AgentDecl& u : n.agents)
      (u.role == Role::low ? low : high).push_back(u.name);
    auto build = [&](const std::vector<std::string>& agents) {
      std::vector<std::vector<std::vector<int>>> succ(
          n.states.size(),
          std::vector<std::vector<int>>(agents.size(), std::vector<int>(n.actions.size(), -1)));
      for (std::size_t s = 0; s < n.states.size(); ++s)
        for (std::size_t u = 0; u < agents.size(); ++u)
          for (std::size_t a = 0; a < n.actions.size(); ++a) {
            auto t = n.successor(n.states[s], agents[u], n.actions[a]);
            if (t) succ[s][u][a] = state_index.at(*t);
          }
      return succ;
    };
    low_succ = build(low);
    high_succ = build(high);
  }
};

StatePartition partition_from_uf(const TransitionNetwork& net, UnionFind& uf) {
  std::map<int, std::vector<std::string>> by_root;
  for (std::size_t i = 0; i < net.states.size(); ++i)
    by_root[uf.find(static_cast<int>(i))].push_back(net.states[i]);
  StatePartition part;
  for (auto& [root, members] : by_root) part.blocks.push_back(std::move(members));
  return part;
}

}  // namespace

bool StatePartition::related(const std::string& a, const std::string& b) const {
  const auto* ba = block_of(a);
  return ba && ba == block_of(b);
}

const std::vector<std::string>* StatePartition::block_of(const std::string& s) const {
  for (const auto& block : blocks)
    if (std::find(block.begin(), block.end(), s) != block.end()) return &block;
  return nullptr;
}

bool StatePartition::refines(const StatePartition& coarser) const {
  for (const auto& block : blocks) {
    if (block.empty()) continue;
    const auto* target = coarser.block_of(block.front());
    if (!target) return false;
    for (const std::string& s : block)
      if (coarser.block_of(s) != target) return false;
  }
  return true;
}

StatePartition make_partition(const TransitionNetwork& net,
                              const std::vector<std::vector<std::string>>& blocks) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < net.states.size(); ++i)
    index.emplace(net.states[i], static_cast<int>(i));
  UnionFind uf(net.states.size());
  std::set<std::string> covered;
  for (const auto& block : blocks) {
    for (const std::string& s : block) {
      auto it = index.find(s);
      if (it == index.end()) throw std::invalid_argument("partition names unknown state " + s);
      if (!covered.insert(s).second)
        throw std::invalid_argument("partition repeats state " + s);
      uf.unite(index.at(block.front()), it->second);
    }
  }
  if (covered.size() != net.states.size())
    throw std::invalid_argument("partition does not cover all states");
  return partition_from_uf(net, uf);
}

StatePartition compute_rstar(const TransitionNetwork& net) {
  ValidationReport report = validate_network(net);
  if (!report.ok())
    throw std::invalid_argument("malformed network: " + report.violations.front().message);

  Indexed idx(net);
  const std::size_t n = net.states.size();
  UnionFind uf(n);

  // Seed: every single high step. Transitive connectivity over these steps is
  // exactly what sequences of high personalized actions generate.
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t u = 0; u < idx.high.size(); ++u)
      for (std::size_t a = 0; a < net.actions.size(); ++a)
        if (int t = idx.high_succ[s][u][a]; t >= 0) uf.unite(static_cast<int>(s), t);

  // Propagate along low actions defined at both sides of a related pair,
  // reprocessing merged classes until nothing changes.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t s1 = 0; s1 < n; ++s1) {
      for (std::size_t s2 = s1 + 1; s2 < n; ++s2) {
        if (uf.find(static_cast<int>(s1)) != uf.find(static_cast<int>(s2))) continue;
        for (std::size_t u = 0; u < idx.low.size(); ++u) {
          for (std::size_t a = 0; a < net.actions.size(); ++a) {
            int t1 = idx.low_succ[s1][u][a];
            int t2 = idx.low_succ[s2][u][a];
            if (t1 < 0 || t2 < 0) continue;
            if (uf.unite(t1, t2)) changed = true;
          }
        }
      }
    }
  }

  return partition_from_uf(net, uf);
}

UnwindingReport check_unwinding(const TransitionNetwork& net, const StatePartition& part) {
  std::set<std::string> covered;
  for (const auto& block : part.blocks)
    for (const std::string& s : block)
      if (!net.has_state(s) || !covered.insert(s).second)
        throw std::invalid_argument("not a partition of the network's states");
  if (covered.size() != net.states.size())
    throw std::invalid_argument("partition does not cover all states");

  UnwindingReport report;
  const auto low = net.low_agents();
  const auto high = net.high_agents();

  for (const auto& block : part.blocks) {
    for (std::size_t i = 0; i < block.size() && (report.oc || report.sc); ++i) {
      for (std::size_t j = i + 1; j < block.size() && (report.oc || report.sc); ++j) {
        const std::string& s1 = block[i];
        const std::string& s2 = block[j];
        for (const std::string& l : low) {
          if (report.oc && net.obs_of(s1, l) != net.obs_of(s2, l)) {
            report.oc = false;
            report.oc_witness = {s1, s2, l, net.obs_of(s1, l), net.obs_of(s2, l)};
          }
          for (const std::string& a : net.actions) {
            if (!report.sc) break;
            auto t1 = net.successor(s1, l, a);
            auto t2 = net.successor(s2, l, a);
            if (t1 && t2 && !part.related(*t1, *t2)) {
              report.sc = false;
              report.sc_witness = {s1, s2, l, a, *t1, *t2};
            }
          }
        }
      }
    }
  }

  for (const std::string& s : net.states) {
    if (!report.lr) break;
    for (const std::string& h : high) {
      for (const std::string& a : net.actions) {
        auto t = net.successor(s, h, a);
        if (t && !part.related(s, *t)) {
          report.lr = false;
          report.lr_witness = {s, h, a, *t};
          break;
        }
      }
      if (!report.lr) break;
    }
  }

  return report;
}

NIVerdict check_ni_exact(const TransitionNetwork& net) {
  StatePartition rstar = compute_rstar(net);
  UnwindingReport unwinding = check_unwinding(net, rstar);
  NIVerdict verdict;
  verdict.method = NIMethod::exact;
  verdict.holds = unwinding.oc;
  if (!unwinding.oc) {
    const OCCounterexample& w = *unwinding.oc_witness;
    verdict.exact_witness = NIExactWitness{w.state1, w.state2, w.agent, w.obs1, w.obs2};
  }
  return verdict;
}

NIVerdict check_ni_bounded(const TransitionNetwork& net, int depth) {
  if (depth < 0) throw std::invalid_argument("depth must be non-negative");
  ValidationReport report = validate_network(net);
  if (!report.ok())
    throw std::invalid_argument("malformed network: " + report.violations.front().message);

  NIVerdict verdict;
  verdict.method = NIMethod::bounded;
  verdict.depth = depth;
  verdict.holds = true;

  const auto high_set = net.high_agents();
  std::vector<std::string> low_ordered;
  for (const AgentDecl& u : net.agents)
    if (u.role == Role::low) low_ordered.push_back(u.name);

  // Search over pairs (state after alpha, state after the purged run). Every
  // path of length d here is an executable alpha of length d with a defined
  // purged run, and conversely, so reaching a pair with differing low
  // observations within `depth` layers is exactly a bounded violation.
  struct Node {
    std::string run, purged;
  };
  std::map<std::pair<std::string, std::string>, std::pair<int, PersonalizedAction>> parent;
  std::deque<std::pair<Node, int>> queue;
  std::map<std::pair<std::string, std::string>, int> seen;
  std::vector<std::pair<std::string, std::string>> order;  // discovery order

  auto differing_agent = [&](const std::string& s, const std::string& t)
      -> std::optional<std::string> {
    for (const std::string& l : low_ordered)
      if (net.obs_of(s, l) != net.obs_of(t, l)) return l;
    return std::nullopt;
  };

  auto emit_witness = [&](const std::string& s, const std::string& t, const std::string& agent) {
    ActionSequence alpha;
    std::pair<std::string, std::string> cur{s, t};
    while (parent.count(cur)) {
      auto& [idx, action] = parent.at(cur);
      alpha.push_back(action);
      cur = order[static_cast<std::size_t>(idx)];
    }
    std::reverse(alpha.begin(), alpha.end());
    verdict.holds = false;
    verdict.bounded_witness =
        NIBoundedWitness{alpha, agent, net.obs_of(s, agent), net.obs_of(t, agent)};
  };

  Node start{net.initial, net.initial};
  seen[{start.run, start.purged}] = 0;
  order.push_back({start.run, start.purged});
  if (auto l = differing_agent(start.run, start.purged)) {
    emit_witness(start.run, start.purged, *l);
    return verdict;
  }
  queue.push_back({start, 0});

  while (!queue.empty()) {
    auto [node, layer] = queue.front();
    queue.pop_front();
    if (layer >= depth) continue;
    int node_idx = seen.at({node.run, node.purged});
    for (const AgentDecl& u : net.agents) {
      bool is_high = high_set.count(u.name) > 0;
      for (const std::string& a : net.actions) {
        auto run_next = net.successor(node.run, u.name, a);
        if (!run_next) continue;  // alpha itself would be unexecutable
        std::string purged_next;
        if (is_high) {
          purged_next = node.purged;  // purging drops the step
        } else {
          auto t = net.successor(node.purged, u.name, a);
          if (!t) continue;  // purged run undefined: comparison is vacuous
          purged_next = *t;
        }
        std::pair<std::string, std::string> key{*run_next, purged_next};
        if (seen.count(key)) continue;
        seen[key] = static_cast<int>(order.size());
        order.push_back(key);
        parent[key] = {node_idx, PersonalizedAction{u.name, a}};
        if (auto l = differing_agent(*run_next, purged_next)) {
          emit_witness(*run_next, purged_next, *l);
          return verdict;
        }
        queue.push_back({Node{*run_next, purged_next}, layer + 1});
      }
    }
  }

  return verdict;
}

WitnessReplay replay_ni_witness(const TransitionNetwork& net, const ActionSequence& alpha,
                                const std::string& low_agent) {
  WitnessReplay replay;
  ExecResult run = exec(net, net.initial, alpha);
  ExecResult purged = exec(net, net.initial, purge(alpha, net.high_agents()));
  replay.executable = run.has_value();
  replay.purged_defined = purged.has_value();
  if (run) replay.obs_run = net.obs_of(*run, low_agent);
  if (purged) replay.obs_purged = net.obs_of(*purged, low_agent);
  replay.violates = run && purged && replay.obs_run != replay.obs_purged;
  return replay;
}

}  // namespace effsec
