#include "effsec/games.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "effsec/errors.hpp"

namespace effsec {

namespace {

struct Move {
  std::string agent;
  std::string action;
  int target = -1;
};

// Index view of a network for the game constructions: states by declaration
// order, per-state moves split into the attacker's own and everyone else's.
struct GameContext {
  const TransitionNetwork& net;
  std::string attacker;
  std::map<std::string, int> state_index;
  std::vector<std::string> labels;               // per state: attacker's observation
  std::vector<std::vector<Move>> env_moves;      // per state, declaration order
  std::vector<std::map<std::string, int>> att_moves;  // per state: action -> target
  std::vector<std::set<std::string>> enabled;    // per state: agents with a move

  GameContext(const TransitionNetwork& n, const std::string& att) : net(n), attacker(att) {
    for (std::size_t i = 0; i < n.states.size(); ++i)
      state_index.emplace(n.states[i], static_cast<int>(i));
    labels.resize(n.states.size());
    env_moves.resize(n.states.size());
    att_moves.resize(n.states.size());
    enabled.resize(n.states.size());
    for (std::size_t s = 0; s < n.states.size(); ++s) {
      labels[s] = n.obs_of(n.states[s], att);
      for (const AgentDecl& u : n.agents) {
        for (const std::string& a : n.actions) {
          auto t = n.successor(n.states[s], u.name, a);
          if (!t) continue;
          int target = state_index.at(*t);
          enabled[s].insert(u.name);
          if (u.name == att)
            att_moves[s].emplace(a, target);
          else
            env_moves[s].push_back({u.name, a, target});
        }
      }
    }
  }

  // Least superset closed under observation-preserving moves: always the other
  // agents' moves, plus the attacker's own moves with `action` when given.
  std::vector<int> closure(const std::vector<int>& seed,
                           const std::optional<std::string>& action) const {
    std::set<int> in(seed.begin(), seed.end());
    std::deque<int> work(seed.begin(), seed.end());
    const std::string& obs = labels[static_cast<std::size_t>(seed.front())];
    auto push = [&](int t) {
      if (labels[static_cast<std::size_t>(t)] == obs && in.insert(t).second) work.push_back(t);
    };
    while (!work.empty()) {
      int s = work.front();
      work.pop_front();
      for (const Move& m : env_moves[static_cast<std::size_t>(s)]) push(m.target);
      if (action) {
        auto it = att_moves[static_cast<std::size_t>(s)].find(*action);
        if (it != att_moves[static_cast<std::size_t>(s)].end()) push(it->second);
      }
    }
    return {in.begin(), in.end()};
  }

  // Cycle in the subgraph of observation-preserving moves over `closure_set`.
  bool has_stutter_cycle(const std::vector<int>& closure_set,
                         const std::optional<std::string>& action) const {
    std::set<int> members(closure_set.begin(), closure_set.end());
    const std::string& obs = labels[static_cast<std::size_t>(closure_set.front())];
    auto silent_targets = [&](int s) {
      std::vector<int> out;
      for (const Move& m : env_moves[static_cast<std::size_t>(s)])
        if (labels[static_cast<std::size_t>(m.target)] == obs) out.push_back(m.target);
      if (action) {
        auto it = att_moves[static_cast<std::size_t>(s)].find(*action);
        if (it != att_moves[static_cast<std::size_t>(s)].end() &&
            labels[static_cast<std::size_t>(it->second)] == obs)
          out.push_back(it->second);
      }
      return out;
    };
    std::map<int, int> color;  // 0 white, 1 gray, 2 black
    for (int root : closure_set) {
      if (color[root]) continue;
      std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
      color[root] = 1;
      while (!stack.empty()) {
        auto [s, next] = stack.back();
        std::vector<int> targets = silent_targets(s);
        if (next < targets.size()) {
          ++stack.back().second;
          int t = targets[next];
          if (!members.count(t)) continue;
          if (color[t] == 1) return true;
          if (color[t] == 0) {
            color[t] = 1;
            stack.push_back({t, 0});
          }
        } else {
          color[s] = 2;
          stack.pop_back();
        }
      }
    }
    return false;
  }
};

std::vector<std::string> names_of(const GameContext& ctx, const std::vector<int>& ids) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(ctx.net.states[static_cast<std::size_t>(id)]);
  return out;
}

void require_valid(const TransitionNetwork& net) {
  ValidationReport report = validate_network(net);
  if (!report.ok())
    throw std::invalid_argument("malformed network: " + report.violations.front().message);
}

std::set<std::string> target_labels(const BeliefArena& arena, const Goal& goal) {
  std::set<std::string> labels;
  for (const std::string& s : goal.states) {
    auto it = arena.state_obs.find(s);
    if (it == arena.state_obs.end()) throw std::invalid_argument("goal names unknown state " + s);
    labels.insert(it->second);
  }
  for (const auto& [s, obs] : arena.state_obs) {
    if (labels.count(obs) && !goal.states.count(s))
      throw UnsupportedGoalError(
          "reachability target is not a union of the attacker's observation classes: state " + s +
          " shares observation " + obs + " with a target state but is not a target");
  }
  return labels;
}

}  // namespace

const char* to_string(Semantics semantics) {
  return semantics == Semantics::strict ? "strict" : "fair";
}

const ArenaActionEval& BeliefArena::eval_of(int node,
                                            const std::optional<std::string>& action) const {
  for (const ArenaActionEval& eval : nodes[static_cast<std::size_t>(node)].evals)
    if (eval.action == action) return eval;
  throw std::invalid_argument("no evaluation for that action at this node");
}

int BeliefArena::find_node(const std::vector<std::string>& belief) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].belief == belief) return static_cast<int>(i);
  return -1;
}

const StrategyEntry* Strategy::find(const std::vector<std::string>& belief) const {
  for (const StrategyEntry& entry : entries)
    if (entry.belief == belief) return &entry;
  return nullptr;
}

BeliefArena build_belief_arena(const TransitionNetwork& net, const std::string& attacker) {
  require_valid(net);
  if (!net.has_agent(attacker)) throw std::invalid_argument("unknown agent: " + attacker);
  if (net.role_of(attacker) != Role::low)
    throw std::invalid_argument("attacker " + attacker + " is not a low agent");

  GameContext ctx(net, attacker);
  BeliefArena arena;
  arena.attacker = attacker;
  for (const std::string& s : net.states) arena.state_obs[s] = net.obs_of(s, attacker);

  std::map<std::vector<int>, int> ids;
  std::vector<std::vector<int>> beliefs;
  std::deque<int> work;

  auto intern = [&](std::vector<int> belief, const std::string& history) {
    auto it = ids.find(belief);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(arena.nodes.size());
    ids.emplace(belief, id);
    ArenaNode node;
    node.belief = names_of(ctx, belief);
    node.obs = ctx.labels[static_cast<std::size_t>(belief.front())];
    node.history = history;
    for (int s : belief)
      node.enabled[net.states[static_cast<std::size_t>(s)]] =
          ctx.enabled[static_cast<std::size_t>(s)];
    arena.nodes.push_back(std::move(node));
    beliefs.push_back(std::move(belief));
    work.push_back(id);
    return id;
  };

  int s0 = ctx.state_index.at(net.initial);
  arena.initial = intern(ctx.closure({s0}, std::nullopt),
                         ctx.labels[static_cast<std::size_t>(s0)]);

  while (!work.empty()) {
    int id = work.front();
    work.pop_front();
    const std::vector<int> belief = beliefs[static_cast<std::size_t>(id)];

    // Availability-awareness makes the repertoire uniform across the belief.
    std::set<std::string> actions;
    for (const auto& [a, t] : ctx.att_moves[static_cast<std::size_t>(belief.front())])
      actions.insert(a);
    arena.nodes[static_cast<std::size_t>(id)].actions = actions;

    std::vector<std::optional<std::string>> choices;
    if (actions.empty())
      choices.push_back(std::nullopt);
    else
      for (const std::string& a : actions) choices.push_back(a);

    for (const auto& choice : choices) {
      ArenaActionEval eval;
      eval.action = choice;
      std::vector<int> closure_set = ctx.closure(belief, choice);
      eval.closure = names_of(ctx, closure_set);
      eval.stutter_cycle = ctx.has_stutter_cycle(closure_set, choice);

      const std::string& obs = ctx.labels[static_cast<std::size_t>(belief.front())];
      std::map<std::string, std::vector<int>> groups;
      std::vector<ArenaOutcome> raw;
      for (int s : closure_set) {
        bool movable = false;
        auto observe = [&](const std::string& actor, const std::string& action, int t) {
          movable = true;
          const std::string& new_obs = ctx.labels[static_cast<std::size_t>(t)];
          if (new_obs == obs) return;
          raw.push_back({actor, action, net.states[static_cast<std::size_t>(s)],
                         net.states[static_cast<std::size_t>(t)], new_obs, -1});
          auto& group = groups[new_obs];
          if (std::find(group.begin(), group.end(), t) == group.end()) group.push_back(t);
        };
        if (choice) {
          auto it = ctx.att_moves[static_cast<std::size_t>(s)].find(*choice);
          if (it != ctx.att_moves[static_cast<std::size_t>(s)].end())
            observe(attacker, *choice, it->second);
        }
        for (const Move& m : ctx.env_moves[static_cast<std::size_t>(s)])
          observe(m.agent, m.action, m.target);
        if (!movable) eval.deadlock = true;
      }

      const std::string history = arena.nodes[static_cast<std::size_t>(id)].history;
      for (auto& [new_obs, targets] : groups) {
        std::sort(targets.begin(), targets.end());
        int succ = intern(ctx.closure(targets, std::nullopt), history + "/" + new_obs);
        eval.successor_by_obs[new_obs] = succ;
      }
      for (ArenaOutcome& outcome : raw) outcome.successor = eval.successor_by_obs.at(outcome.new_obs);
      eval.outcomes = std::move(raw);
      arena.nodes[static_cast<std::size_t>(id)].evals.push_back(std::move(eval));
    }
  }

  return arena;
}

namespace {

void validate_goal_states(const BeliefArena& arena, const Goal& goal) {
  for (const std::string& s : goal.states)
    if (!arena.state_obs.count(s)) throw std::invalid_argument("goal names unknown state " + s);
}

Strategy extract_strategy(const BeliefArena& arena, const std::map<int, std::string>& chosen,
                          const std::set<int>& skip) {
  // Keep only nodes reachable from the initial one when the chosen actions
  // are played; terminal nodes need no entry.
  Strategy strategy;
  strategy.attacker = arena.attacker;
  std::set<int> visited;
  std::deque<int> work{arena.initial};
  visited.insert(arena.initial);
  while (!work.empty()) {
    int id = work.front();
    work.pop_front();
    if (skip.count(id)) continue;
    const ArenaNode& node = arena.nodes[static_cast<std::size_t>(id)];
    std::optional<std::string> action;
    if (auto it = chosen.find(id); it != chosen.end()) action = it->second;
    if (action)
      strategy.entries.push_back({node.belief, node.obs, node.history, *action});
    const ArenaActionEval& eval = arena.eval_of(id, action);
    for (const auto& [obs, succ] : eval.successor_by_obs)
      if (visited.insert(succ).second) work.push_back(succ);
  }
  return strategy;
}

}  // namespace

SolveResult solve_strict(const BeliefArena& arena, const Goal& goal) {
  validate_goal_states(arena, goal);
  SolveResult result;
  result.semantics = Semantics::strict;
  const std::size_t n = arena.nodes.size();

  if (goal.kind == GoalKind::reachability) {
    std::set<std::string> targets = target_labels(arena, goal);
    std::vector<char> win(n, 0);
    std::set<int> terminal;
    for (std::size_t i = 0; i < n; ++i)
      if (targets.count(arena.nodes[i].obs)) {
        win[i] = 1;
        terminal.insert(static_cast<int>(i));
      }
    std::map<int, std::string> chosen;
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (win[i]) continue;
        for (const ArenaActionEval& eval : arena.nodes[i].evals) {
          if (eval.stutter_cycle || eval.deadlock) continue;
          bool all = true;
          for (const auto& [obs, succ] : eval.successor_by_obs)
            if (!win[static_cast<std::size_t>(succ)]) {
              all = false;
              break;
            }
          if (!all) continue;
          win[i] = 1;
          // Recording the choice at insertion keeps the strategy rank
          // decreasing, so plays cannot cycle among winning nodes.
          if (eval.action) chosen[static_cast<int>(i)] = *eval.action;
          changed = true;
          break;
        }
      }
    }
    result.winning = win[static_cast<std::size_t>(arena.initial)] != 0;
    if (result.winning)
      result.strategy = extract_strategy(arena, chosen, terminal);
    else
      result.losing_node = arena.initial;
    return result;
  }

  // Safety: greatest fixpoint. A node survives while some action keeps the
  // whole closure outside the avoid-set and every observable successor
  // survives too.
  std::vector<char> safe(n, 1);
  auto eval_ok = [&](const ArenaActionEval& eval) {
    for (const std::string& s : eval.closure)
      if (goal.states.count(s)) return false;
    for (const auto& [obs, succ] : eval.successor_by_obs)
      if (!safe[static_cast<std::size_t>(succ)]) return false;
    return true;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!safe[i]) continue;
      bool ok = false;
      for (const ArenaActionEval& eval : arena.nodes[i].evals)
        if (eval_ok(eval)) {
          ok = true;
          break;
        }
      if (!ok) {
        safe[i] = 0;
        changed = true;
      }
    }
  }
  result.winning = safe[static_cast<std::size_t>(arena.initial)] != 0;
  if (result.winning) {
    std::map<int, std::string> chosen;
    for (std::size_t i = 0; i < n; ++i) {
      if (!safe[i]) continue;
      for (const ArenaActionEval& eval : arena.nodes[i].evals)
        if (eval_ok(eval)) {
          if (eval.action) chosen[static_cast<int>(i)] = *eval.action;
          break;
        }
    }
    result.strategy = extract_strategy(arena, chosen, {});
  } else {
    result.losing_node = arena.initial;
  }
  return result;
}

namespace {

// ---- fair solving: product construction + fair-cycle emptiness ----

struct ProductEdge {
  std::string agent, action;
  int to = -1;
};

struct Product {
  std::vector<std::pair<int, int>> states;  // (state index, arena node)
  std::map<std::pair<int, int>, int> index;
  std::vector<std::vector<ProductEdge>> edges;
  std::vector<char> won;
  std::vector<int> parent;                 // BFS tree for counterexample prefixes
  std::vector<ProductEdge> parent_edge;
};

struct EvalOutcome {
  enum class Kind { win, fail, needs } kind;
  int needed_node = -1;
  Counterexample counterexample;
};

class FairEvaluator {
 public:
  FairEvaluator(const TransitionNetwork& net, const BeliefArena& arena, const Goal& goal)
      : ctx_(net, arena.attacker), arena_(arena), goal_(goal) {
    if (goal.kind == GoalKind::reachability) target_labels_ = target_labels(arena, goal);
    for (const std::string& s : goal.states) avoid_.insert(ctx_.state_index.at(s));
  }

  // Builds the sigma-trimmed product for a (possibly partial) assignment and
  // model-checks it: wins when no reachable goal-violating deadlock and no
  // reachable target-avoiding fair cycle exists.
  EvalOutcome evaluate(const std::map<int, std::string>& assignment) {
    Product product;
    auto intern = [&](int s, int node, int parent, const ProductEdge& via) {
      auto key = std::make_pair(s, node);
      auto it = product.index.find(key);
      if (it != product.index.end()) return it->second;
      int id = static_cast<int>(product.states.size());
      product.index.emplace(key, id);
      product.states.push_back(key);
      product.edges.emplace_back();
      product.won.push_back(0);
      product.parent.push_back(parent);
      product.parent_edge.push_back(via);
      return id;
    };

    int s0 = ctx_.state_index.at(ctx_.net.initial);
    intern(s0, arena_.initial, -1, {});
    for (int pid = 0; pid < static_cast<int>(product.states.size()); ++pid) {
      auto [s, node] = product.states[static_cast<std::size_t>(pid)];
      if (goal_.kind == GoalKind::safety && avoid_.count(s)) {
        EvalOutcome out{EvalOutcome::Kind::fail, -1, {}};
        out.counterexample.kind = "safety-violation";
        out.counterexample.prefix = prefix_of(product, pid);
        return out;
      }
      if (goal_.kind == GoalKind::reachability &&
          target_labels_.count(arena_.nodes[static_cast<std::size_t>(node)].obs)) {
        product.won[static_cast<std::size_t>(pid)] = 1;
        continue;  // absorbing: the play already satisfied the goal
      }

      std::optional<std::string> action;
      if (!arena_.nodes[static_cast<std::size_t>(node)].actions.empty()) {
        auto it = assignment.find(node);
        if (it == assignment.end()) return {EvalOutcome::Kind::needs, node, {}};
        action = it->second;
      }
      const ArenaActionEval& eval = arena_.eval_of(node, action);

      bool any = false;
      auto step = [&](const std::string& agent, const std::string& act, int t) {
        any = true;
        const std::string& new_obs = ctx_.labels[static_cast<std::size_t>(t)];
        int next_node =
            new_obs == arena_.nodes[static_cast<std::size_t>(node)].obs
                ? node
                : eval.successor_by_obs.at(new_obs);
        ProductEdge edge{agent, act, -1};
        int to = intern(t, next_node, pid, edge);
        edge.to = to;
        product.parent_edge[static_cast<std::size_t>(to)].to = to;
        product.edges[static_cast<std::size_t>(pid)].push_back(edge);
      };
      if (action) {
        auto it = ctx_.att_moves[static_cast<std::size_t>(s)].find(*action);
        if (it != ctx_.att_moves[static_cast<std::size_t>(s)].end())
          step(ctx_.attacker, *action, it->second);
      }
      for (const Move& m : ctx_.env_moves[static_cast<std::size_t>(s)])
        step(m.agent, m.action, m.target);

      if (!any && goal_.kind == GoalKind::reachability) {
        EvalOutcome out{EvalOutcome::Kind::fail, -1, {}};
        out.counterexample.kind = "deadlock";
        out.counterexample.prefix = prefix_of(product, pid);
        return out;
      }
    }

    if (goal_.kind == GoalKind::reachability) {
      if (auto ce = fair_cycle(product)) {
        EvalOutcome out{EvalOutcome::Kind::fail, -1, {}};
        out.counterexample = *ce;
        return out;
      }
    }
    return {EvalOutcome::Kind::win, -1, {}};
  }

 private:
  std::vector<CounterexampleStep> prefix_of(const Product& product, int pid) const {
    std::vector<CounterexampleStep> steps;
    int cur = pid;
    while (product.parent[static_cast<std::size_t>(cur)] >= 0) {
      int par = product.parent[static_cast<std::size_t>(cur)];
      const ProductEdge& e = product.parent_edge[static_cast<std::size_t>(cur)];
      steps.push_back({e.agent, e.action,
                       ctx_.net.states[static_cast<std::size_t>(
                           product.states[static_cast<std::size_t>(par)].first)],
                       ctx_.net.states[static_cast<std::size_t>(
                           product.states[static_cast<std::size_t>(cur)].first)]});
      cur = par;
    }
    std::reverse(steps.begin(), steps.end());
    return steps;
  }

  // Tarjan over the non-won subgraph; an SCC admits a fair target-avoiding
  // lasso exactly when every agent enabled at all of its states also moves on
  // some internal edge.
  std::optional<Counterexample> fair_cycle(const Product& product) const {
    const int n = static_cast<int>(product.states.size());
    std::vector<int> idx(static_cast<std::size_t>(n), -1),
        low(static_cast<std::size_t>(n), 0), comp(static_cast<std::size_t>(n), -1);
    std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
    std::vector<int> stack;
    int counter = 0, comp_count = 0;

    std::function<void(int)> strongconnect = [&](int v) {
      idx[static_cast<std::size_t>(v)] = low[static_cast<std::size_t>(v)] = counter++;
      stack.push_back(v);
      on_stack[static_cast<std::size_t>(v)] = 1;
      for (const ProductEdge& e : product.edges[static_cast<std::size_t>(v)]) {
        if (product.won[static_cast<std::size_t>(e.to)]) continue;
        if (idx[static_cast<std::size_t>(e.to)] < 0) {
          strongconnect(e.to);
          low[static_cast<std::size_t>(v)] =
              std::min(low[static_cast<std::size_t>(v)], low[static_cast<std::size_t>(e.to)]);
        } else if (on_stack[static_cast<std::size_t>(e.to)]) {
          low[static_cast<std::size_t>(v)] =
              std::min(low[static_cast<std::size_t>(v)], idx[static_cast<std::size_t>(e.to)]);
        }
      }
      if (low[static_cast<std::size_t>(v)] == idx[static_cast<std::size_t>(v)]) {
        while (true) {
          int w = stack.back();
          stack.pop_back();
          on_stack[static_cast<std::size_t>(w)] = 0;
          comp[static_cast<std::size_t>(w)] = comp_count;
          if (w == v) break;
        }
        ++comp_count;
      }
    };
    for (int v = 0; v < n; ++v)
      if (idx[static_cast<std::size_t>(v)] < 0 && !product.won[static_cast<std::size_t>(v)])
        strongconnect(v);

    for (int c = 0; c < comp_count; ++c) {
      std::vector<int> members;
      for (int v = 0; v < n; ++v)
        if (comp[static_cast<std::size_t>(v)] == c) members.push_back(v);
      std::vector<std::pair<int, ProductEdge>> internal;
      for (int v : members)
        for (const ProductEdge& e : product.edges[static_cast<std::size_t>(v)])
          if (!product.won[static_cast<std::size_t>(e.to)] &&
              comp[static_cast<std::size_t>(e.to)] == c)
            internal.push_back({v, e});
      if (internal.empty()) continue;

      std::set<std::string> enabled_everywhere;
      bool first = true;
      for (int v : members) {
        const auto& enabled =
            ctx_.enabled[static_cast<std::size_t>(product.states[static_cast<std::size_t>(v)].first)];
        if (first) {
          enabled_everywhere = enabled;
          first = false;
        } else {
          std::set<std::string> inter;
          std::set_intersection(enabled_everywhere.begin(), enabled_everywhere.end(),
                                enabled.begin(), enabled.end(),
                                std::inserter(inter, inter.begin()));
          enabled_everywhere = std::move(inter);
        }
      }
      bool fair = true;
      for (const std::string& u : enabled_everywhere) {
        bool acts = std::any_of(internal.begin(), internal.end(),
                                [&](const auto& p) { return p.second.agent == u; });
        if (!acts) {
          fair = false;
          break;
        }
      }
      if (!fair) continue;

      Counterexample ce;
      ce.kind = "fair-cycle";
      ce.prefix = prefix_of(product, members.front());
      ce.cycle = closed_walk(product, members, internal);
      return ce;
    }
    return std::nullopt;
  }

  // A closed walk through every internal edge of the SCC: each required agent
  // acts on it, so looping it forever is a fair play.
  std::vector<CounterexampleStep> closed_walk(
      const Product& product, const std::vector<int>& members,
      const std::vector<std::pair<int, ProductEdge>>& internal) const {
    std::set<int> member_set(members.begin(), members.end());
    auto path_inside = [&](int from, int to) {
      std::vector<CounterexampleStep> steps;
      if (from == to) return steps;
      std::map<int, std::pair<int, ProductEdge>> parent;
      std::deque<int> work{from};
      std::set<int> seen{from};
      while (!work.empty()) {
        int v = work.front();
        work.pop_front();
        if (v == to) break;
        for (const ProductEdge& e : product.edges[static_cast<std::size_t>(v)]) {
          if (!member_set.count(e.to) || !seen.insert(e.to).second) continue;
          parent[e.to] = {v, e};
          work.push_back(e.to);
        }
      }
      int cur = to;
      while (cur != from) {
        auto [par, e] = parent.at(cur);
        steps.push_back({e.agent, e.action,
                         ctx_.net.states[static_cast<std::size_t>(
                             product.states[static_cast<std::size_t>(par)].first)],
                         ctx_.net.states[static_cast<std::size_t>(
                             product.states[static_cast<std::size_t>(cur)].first)]});
        cur = par;
      }
      std::reverse(steps.begin(), steps.end());
      return steps;
    };

    std::vector<CounterexampleStep> walk;
    int position = internal.front().first;
    int start = position;
    for (const auto& [from, edge] : internal) {
      auto hop = path_inside(position, from);
      walk.insert(walk.end(), hop.begin(), hop.end());
      walk.push_back({edge.agent, edge.action,
                      ctx_.net.states[static_cast<std::size_t>(
                          product.states[static_cast<std::size_t>(from)].first)],
                      ctx_.net.states[static_cast<std::size_t>(
                          product.states[static_cast<std::size_t>(edge.to)].first)]});
      position = edge.to;
    }
    auto back = path_inside(position, start);
    walk.insert(walk.end(), back.begin(), back.end());
    return walk;
  }

  GameContext ctx_;
  const BeliefArena& arena_;
  Goal goal_;
  std::set<std::string> target_labels_;
  std::set<int> avoid_;
};

}  // namespace

SolveResult solve_fair(const TransitionNetwork& net, const BeliefArena& arena, const Goal& goal,
                       const SolveOptions& options) {
  require_valid(net);
  validate_goal_states(arena, goal);
  if (goal.kind == GoalKind::reachability) target_labels(arena, goal);  // validates definability

  SolveResult result;
  result.semantics = Semantics::fair;

  FairEvaluator evaluator(net, arena, goal);
  std::uint64_t evaluations = 0;
  auto charge = [&]() {
    if (++evaluations > options.budget)
      throw BudgetError("fair strategy search exceeded its budget of " +
                        std::to_string(options.budget) + " evaluations");
  };

  std::map<int, std::string> assignment;
  std::function<bool()> search = [&]() -> bool {
    charge();
    EvalOutcome outcome = evaluator.evaluate(assignment);
    if (outcome.kind == EvalOutcome::Kind::win) return true;
    if (outcome.kind == EvalOutcome::Kind::fail) return false;
    int node = outcome.needed_node;
    for (const std::string& a : arena.nodes[static_cast<std::size_t>(node)].actions) {
      assignment[node] = a;
      if (search()) return true;
      assignment.erase(node);
    }
    return false;
  };

  if (search()) {
    result.winning = true;
    Strategy strategy;
    strategy.attacker = arena.attacker;
    for (const auto& [node, action] : assignment) {
      const ArenaNode& n = arena.nodes[static_cast<std::size_t>(node)];
      strategy.entries.push_back({n.belief, n.obs, n.history, action});
    }
    result.strategy = std::move(strategy);
    return result;
  }

  // Diagnostics: the counterexample of the lexicographically least candidate.
  result.losing_node = arena.initial;
  assignment.clear();
  while (true) {
    EvalOutcome outcome = evaluator.evaluate(assignment);
    if (outcome.kind == EvalOutcome::Kind::needs) {
      assignment[outcome.needed_node] =
          *arena.nodes[static_cast<std::size_t>(outcome.needed_node)].actions.begin();
      continue;
    }
    if (outcome.kind == EvalOutcome::Kind::fail) result.counterexample = outcome.counterexample;
    break;
  }
  return result;
}

// ---- independent verification ----

namespace {

// Self-contained re-derivation of beliefs and the trimmed product; shares no
// code with the solvers above on purpose. Uses Kosaraju for components where
// the solver uses Tarjan.
class IndependentChecker {
 public:
  IndependentChecker(const TransitionNetwork& net, const Strategy& strategy)
      : net_(net), strategy_(strategy) {
    if (!net.has_agent(strategy.attacker))
      throw std::invalid_argument("unknown attacker: " + strategy.attacker);
    if (net.role_of(strategy.attacker) != Role::low)
      throw std::invalid_argument("attacker " + strategy.attacker + " is not a low agent");
    for (std::size_t i = 0; i < net.states.size(); ++i) order_[net.states[i]] = i;
  }

  struct Graph {
    std::vector<std::pair<std::string, std::vector<std::string>>> states;  // (state, belief)
    std::map<std::pair<std::string, std::vector<std::string>>, int> index;
    std::vector<std::vector<ProductEdge>> edges;
    std::vector<char> won;
    std::vector<int> parent;
    std::vector<ProductEdge> parent_edge;
  };

  Graph build(const Goal* goal) {
    Graph g;
    auto intern = [&](const std::string& s, const std::vector<std::string>& belief, int parent,
                      const ProductEdge& via) {
      auto key = std::make_pair(s, belief);
      auto it = g.index.find(key);
      if (it != g.index.end()) return it->second;
      int id = static_cast<int>(g.states.size());
      g.index.emplace(key, id);
      g.states.push_back(key);
      g.edges.emplace_back();
      g.won.push_back(0);
      g.parent.push_back(parent);
      g.parent_edge.push_back(via);
      return id;
    };

    intern(net_.initial, silent_closure({net_.initial}, std::nullopt), -1, {});
    for (int pid = 0; pid < static_cast<int>(g.states.size()); ++pid) {
      auto [s, belief] = g.states[static_cast<std::size_t>(pid)];
      if (goal && goal->kind == GoalKind::reachability && goal->states.count(s)) {
        g.won[static_cast<std::size_t>(pid)] = 1;
        continue;
      }
      // A safety violation ends the evaluation of the play; nothing past it
      // needs a strategy entry.
      if (goal && goal->kind == GoalKind::safety && goal->states.count(s)) continue;

      std::optional<std::string> action;
      if (!available_actions(net_, s, strategy_.attacker).empty()) {
        const StrategyEntry* entry = strategy_.find(belief);
        if (!entry)
          throw std::invalid_argument("strategy has no action for a reachable belief at " + s);
        action = entry->action;
      }

      std::vector<std::string> extended = silent_closure(belief, action);
      const std::string obs = net_.obs_of(s, strategy_.attacker);
      auto step = [&](const std::string& agent, const std::string& act,
                      const std::string& target) {
        std::vector<std::string> next_belief;
        if (net_.obs_of(target, strategy_.attacker) == obs) {
          next_belief = belief;
        } else {
          next_belief = successor_belief(extended, action,
                                         net_.obs_of(target, strategy_.attacker));
        }
        ProductEdge edge{agent, act, -1};
        int to = intern(target, next_belief, pid, edge);
        edge.to = to;
        g.parent_edge[static_cast<std::size_t>(to)].to = to;
        g.edges[static_cast<std::size_t>(pid)].push_back(edge);
      };
      if (action)
        if (auto t = net_.successor(s, strategy_.attacker, *action)) step(strategy_.attacker, *action, *t);
      for (const AgentDecl& u : net_.agents) {
        if (u.name == strategy_.attacker) continue;
        for (const std::string& a : net_.actions)
          if (auto t = net_.successor(s, u.name, a)) step(u.name, a, *t);
      }
    }
    return g;
  }

  VerificationResult check(const Goal& goal, Semantics semantics) {
    Graph g = build(&goal);

    if (goal.kind == GoalKind::safety) {
      for (int pid = 0; pid < static_cast<int>(g.states.size()); ++pid) {
        if (goal.states.count(g.states[static_cast<std::size_t>(pid)].first)) {
          return fail("safety-violation", g, pid, {});
        }
      }
      return {true, "no avoided state is reachable", std::nullopt};
    }

    // Reachability: every maximal finite path and (per semantics) every
    // relevant infinite path must hit the target.
    for (int pid = 0; pid < static_cast<int>(g.states.size()); ++pid) {
      if (g.won[static_cast<std::size_t>(pid)]) continue;
      if (g.edges[static_cast<std::size_t>(pid)].empty())
        return fail("deadlock", g, pid, {});
    }

    if (semantics == Semantics::strict) {
      if (auto cycle = any_cycle(g)) return fail("cycle", g, cycle->first, cycle->second);
      return {true, "every play reaches the target", std::nullopt};
    }
    if (auto lasso = fair_lasso(g)) return fail("fair-cycle", g, lasso->first, lasso->second);
    return {true, "every fair play reaches the target", std::nullopt};
  }

  Graph build_plain() { return build(nullptr); }

  const TransitionNetwork& net() const { return net_; }

 private:
  std::vector<std::string> sorted_by_declaration(std::set<std::string> states) const {
    std::vector<std::string> out(states.begin(), states.end());
    std::sort(out.begin(), out.end(),
              [&](const std::string& a, const std::string& b) { return order_.at(a) < order_.at(b); });
    return out;
  }

  std::vector<std::string> silent_closure(std::vector<std::string> seed,
                                          const std::optional<std::string>& action) const {
    const std::string obs = net_.obs_of(seed.front(), strategy_.attacker);
    std::set<std::string> in(seed.begin(), seed.end());
    std::deque<std::string> work(seed.begin(), seed.end());
    while (!work.empty()) {
      std::string s = work.front();
      work.pop_front();
      auto push = [&](const std::string& t) {
        if (net_.obs_of(t, strategy_.attacker) == obs && in.insert(t).second) work.push_back(t);
      };
      for (const AgentDecl& u : net_.agents) {
        if (u.name == strategy_.attacker) continue;
        for (const std::string& a : net_.actions)
          if (auto t = net_.successor(s, u.name, a)) push(*t);
      }
      if (action)
        if (auto t = net_.successor(s, strategy_.attacker, *action)) push(*t);
    }
    return sorted_by_declaration(std::move(in));
  }

  std::vector<std::string> successor_belief(const std::vector<std::string>& extended,
                                            const std::optional<std::string>& action,
                                            const std::string& new_obs) const {
    std::set<std::string> targets;
    for (const std::string& s : extended) {
      auto take = [&](const std::string& t) {
        if (net_.obs_of(t, strategy_.attacker) == new_obs) targets.insert(t);
      };
      if (action)
        if (auto t = net_.successor(s, strategy_.attacker, *action)) take(*t);
      for (const AgentDecl& u : net_.agents) {
        if (u.name == strategy_.attacker) continue;
        for (const std::string& a : net_.actions)
          if (auto t = net_.successor(s, u.name, a)) take(*t);
      }
    }
    return silent_closure(sorted_by_declaration(std::move(targets)), std::nullopt);
  }

  VerificationResult fail(const std::string& kind, const Graph& g, int pid,
                          std::vector<CounterexampleStep> cycle) const {
    Counterexample ce;
    ce.kind = kind;
    int cur = pid;
    while (g.parent[static_cast<std::size_t>(cur)] >= 0) {
      int par = g.parent[static_cast<std::size_t>(cur)];
      const ProductEdge& e = g.parent_edge[static_cast<std::size_t>(cur)];
      ce.prefix.push_back({e.agent, e.action, g.states[static_cast<std::size_t>(par)].first,
                           g.states[static_cast<std::size_t>(cur)].first});
      cur = par;
    }
    std::reverse(ce.prefix.begin(), ce.prefix.end());
    ce.cycle = std::move(cycle);
    return {false, kind, ce};
  }

  // Any cycle among non-won states, by iterative DFS back-edge detection.
  std::optional<std::pair<int, std::vector<CounterexampleStep>>> any_cycle(const Graph& g) const {
    const int n = static_cast<int>(g.states.size());
    std::vector<int> color(static_cast<std::size_t>(n), 0);
    std::vector<std::pair<int, ProductEdge>> trail;
    for (int root = 0; root < n; ++root) {
      if (color[static_cast<std::size_t>(root)] || g.won[static_cast<std::size_t>(root)]) continue;
      std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
      color[static_cast<std::size_t>(root)] = 1;
      trail.clear();
      while (!stack.empty()) {
        auto& [v, next] = stack.back();
        if (next < g.edges[static_cast<std::size_t>(v)].size()) {
          const ProductEdge& e = g.edges[static_cast<std::size_t>(v)][next++];
          if (g.won[static_cast<std::size_t>(e.to)]) continue;
          if (color[static_cast<std::size_t>(e.to)] == 1) {
            // Found a back edge: assemble the cycle from the DFS stack.
            std::vector<CounterexampleStep> cycle;
            bool in_cycle = false;
            for (const auto& [from, edge] : trail) {
              if (from == e.to) in_cycle = true;
              if (in_cycle)
                cycle.push_back({edge.agent, edge.action,
                                 g.states[static_cast<std::size_t>(from)].first,
                                 g.states[static_cast<std::size_t>(edge.to)].first});
            }
            cycle.push_back({e.agent, e.action, g.states[static_cast<std::size_t>(v)].first,
                             g.states[static_cast<std::size_t>(e.to)].first});
            return std::make_pair(e.to, cycle);
          }
          if (color[static_cast<std::size_t>(e.to)] == 0) {
            color[static_cast<std::size_t>(e.to)] = 1;
            trail.push_back({v, e});
            stack.push_back({e.to, 0});
          }
        } else {
          color[static_cast<std::size_t>(v)] = 2;
          stack.pop_back();
          if (!trail.empty()) trail.pop_back();
        }
      }
    }
    return std::nullopt;
  }

  std::optional<std::pair<int, std::vector<CounterexampleStep>>> fair_lasso(
      const Graph& g) const {
    const int n = static_cast<int>(g.states.size());
    // Kosaraju: order by finish time, then sweep the transposed graph.
    std::vector<int> finish_order;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int root = 0; root < n; ++root) {
      if (seen[static_cast<std::size_t>(root)] || g.won[static_cast<std::size_t>(root)]) continue;
      std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
      seen[static_cast<std::size_t>(root)] = 1;
      while (!stack.empty()) {
        auto& [v, next] = stack.back();
        if (next < g.edges[static_cast<std::size_t>(v)].size()) {
          const ProductEdge& e = g.edges[static_cast<std::size_t>(v)][next++];
          if (g.won[static_cast<std::size_t>(e.to)] || seen[static_cast<std::size_t>(e.to)])
            continue;
          seen[static_cast<std::size_t>(e.to)] = 1;
          stack.push_back({e.to, 0});
        } else {
          finish_order.push_back(v);
          stack.pop_back();
        }
      }
    }
    std::vector<std::vector<int>> reverse_adj(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v)
      for (const ProductEdge& e : g.edges[static_cast<std::size_t>(v)])
        if (!g.won[static_cast<std::size_t>(v)] && !g.won[static_cast<std::size_t>(e.to)])
          reverse_adj[static_cast<std::size_t>(e.to)].push_back(v);
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    int comp_count = 0;
    for (auto it = finish_order.rbegin(); it != finish_order.rend(); ++it) {
      if (comp[static_cast<std::size_t>(*it)] >= 0) continue;
      std::deque<int> work{*it};
      comp[static_cast<std::size_t>(*it)] = comp_count;
      while (!work.empty()) {
        int v = work.front();
        work.pop_front();
        for (int w : reverse_adj[static_cast<std::size_t>(v)])
          if (comp[static_cast<std::size_t>(w)] < 0) {
            comp[static_cast<std::size_t>(w)] = comp_count;
            work.push_back(w);
          }
      }
      ++comp_count;
    }

    for (int c = 0; c < comp_count; ++c) {
      std::vector<int> members;
      for (int v = 0; v < n; ++v)
        if (comp[static_cast<std::size_t>(v)] == c) members.push_back(v);
      std::vector<std::pair<int, ProductEdge>> internal;
      for (int v : members)
        for (const ProductEdge& e : g.edges[static_cast<std::size_t>(v)])
          if (comp[static_cast<std::size_t>(e.to)] == c) internal.push_back({v, e});
      if (internal.empty()) continue;

      std::set<std::string> enabled_everywhere;
      bool first = true;
      for (int v : members) {
        std::set<std::string> enabled =
            enabled_agents(net_, g.states[static_cast<std::size_t>(v)].first);
        if (first) {
          enabled_everywhere = std::move(enabled);
          first = false;
        } else {
          std::set<std::string> inter;
          std::set_intersection(enabled_everywhere.begin(), enabled_everywhere.end(),
                                enabled.begin(), enabled.end(),
                                std::inserter(inter, inter.begin()));
          enabled_everywhere = std::move(inter);
        }
      }
      bool fair = true;
      for (const std::string& u : enabled_everywhere)
        if (std::none_of(internal.begin(), internal.end(),
                         [&](const auto& p) { return p.second.agent == u; })) {
          fair = false;
          break;
        }
      if (!fair) continue;

      // Closed walk over the internal edges, stitched by shortest hops.
      std::set<int> member_set(members.begin(), members.end());
      auto hop = [&](int from, int to) {
        std::vector<CounterexampleStep> steps;
        if (from == to) return steps;
        std::map<int, std::pair<int, ProductEdge>> parent;
        std::deque<int> work{from};
        std::set<int> visited{from};
        while (!work.empty()) {
          int v = work.front();
          work.pop_front();
          if (v == to) break;
          for (const ProductEdge& e : g.edges[static_cast<std::size_t>(v)]) {
            if (!member_set.count(e.to) || !visited.insert(e.to).second) continue;
            parent[e.to] = {v, e};
            work.push_back(e.to);
          }
        }
        int cur = to;
        while (cur != from) {
          auto [par, e] = parent.at(cur);
          steps.push_back({e.agent, e.action, g.states[static_cast<std::size_t>(par)].first,
                           g.states[static_cast<std::size_t>(cur)].first});
          cur = par;
        }
        std::reverse(steps.begin(), steps.end());
        return steps;
      };
      std::vector<CounterexampleStep> walk;
      int position = internal.front().first;
      int start = position;
      for (const auto& [from, edge] : internal) {
        auto h = hop(position, from);
        walk.insert(walk.end(), h.begin(), h.end());
        walk.push_back({edge.agent, edge.action, g.states[static_cast<std::size_t>(from)].first,
                        g.states[static_cast<std::size_t>(edge.to)].first});
        position = edge.to;
      }
      auto back = hop(position, start);
      walk.insert(walk.end(), back.begin(), back.end());
      return std::make_pair(start, walk);
    }
    return std::nullopt;
  }

  const TransitionNetwork& net_;
  const Strategy& strategy_;
  std::map<std::string, std::size_t> order_;
};

}  // namespace

VerificationResult verify_strategy(const TransitionNetwork& net, const Strategy& strategy,
                                   const Goal& goal, Semantics semantics) {
  require_valid(net);
  for (const std::string& s : goal.states)
    if (!net.has_state(s)) throw std::invalid_argument("goal names unknown state " + s);
  IndependentChecker checker(net, strategy);
  return checker.check(goal, semantics);
}

std::string arena_to_dot(const BeliefArena& arena) {
  std::ostringstream out;
  out << "digraph arena {\n  rankdir=LR;\n  node [shape=box];\n";
  for (std::size_t i = 0; i < arena.nodes.size(); ++i) {
    const ArenaNode& node = arena.nodes[i];
    out << "  n" << i << " [label=\"" << node.obs << "\\n{";
    for (std::size_t j = 0; j < node.belief.size(); ++j) {
      if (j) out << ",";
      out << node.belief[j];
    }
    out << "}\"";
    if (static_cast<int>(i) == arena.initial) out << ", style=bold";
    out << "];\n";
  }
  for (std::size_t i = 0; i < arena.nodes.size(); ++i) {
    for (const ArenaActionEval& eval : arena.nodes[i].evals) {
      for (const auto& [obs, succ] : eval.successor_by_obs) {
        out << "  n" << i << " -> n" << succ << " [label=\""
            << (eval.action ? *eval.action : std::string("-")) << " / " << obs << "\"];\n";
      }
    }
  }
  out << "}\n";
  return out.str();
}

std::string product_to_dot(const TransitionNetwork& net, const Strategy& strategy) {
  IndependentChecker checker(net, strategy);
  IndependentChecker::Graph g = checker.build_plain();
  std::ostringstream out;
  out << "digraph product {\n  rankdir=LR;\n  node [shape=ellipse];\n";
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    out << "  p" << i << " [label=\"" << g.states[i].first << "\\n{";
    for (std::size_t j = 0; j < g.states[i].second.size(); ++j) {
      if (j) out << ",";
      out << g.states[i].second[j];
    }
    out << "}\"];\n";
  }
  for (std::size_t i = 0; i < g.states.size(); ++i)
    for (const ProductEdge& e : g.edges[i])
      out << "  p" << i << " -> p" << e.to << " [label=\"" << e.agent << "." << e.action
          << "\"];\n";
  out << "}\n";
  return out.str();
}

}  // namespace effsec
