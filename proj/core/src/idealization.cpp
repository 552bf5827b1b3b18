#include "effsec/idealization.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "effsec/errors.hpp"

namespace effsec {

namespace {

std::string class_name(std::vector<std::string> members) {
  if (members.size() == 1) return members.front();
  std::sort(members.begin(), members.end());
  std::string out = "{";
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i) out += "+";
    out += members[i];
  }
  out += "}";
  return out;
}

// All set partitions of `items` via restricted-growth strings, member order
// preserved inside sub-blocks.
void enumerate_partitions(const std::vector<std::string>& items,
                          const std::function<void(const std::vector<std::vector<std::string>>&)>&
                              visit) {
  const std::size_t n = items.size();
  std::vector<int> rgs(n, 0);
  std::vector<std::vector<std::string>> blocks;
  auto emit = [&]() {
    int max_label = *std::max_element(rgs.begin(), rgs.end());
    blocks.assign(static_cast<std::size_t>(max_label) + 1, {});
    for (std::size_t i = 0; i < n; ++i)
      blocks[static_cast<std::size_t>(rgs[i])].push_back(items[i]);
    visit(blocks);
  };
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int max_used) {
    if (i == n) {
      emit();
      return;
    }
    for (int label = 0; label <= max_used + 1; ++label) {
      rgs[i] = label;
      rec(i + 1, std::max(max_used, label));
    }
  };
  if (n == 0) {
    visit({});
    return;
  }
  rgs[0] = 0;
  rec(1, 0);
}

std::uint64_t bell_number(std::size_t n) {
  // Bell triangle; sizes here are tiny.
  std::vector<std::vector<std::uint64_t>> tri{{1}};
  for (std::size_t i = 1; i <= n; ++i) {
    std::vector<std::uint64_t> row{tri.back().back()};
    for (std::size_t j = 0; j < tri.back().size(); ++j)
      row.push_back(row.back() + tri.back()[j]);
    tri.push_back(std::move(row));
  }
  return tri[n][0];
}

}  // namespace

bool ObservationPartition::related(const std::string& a, const std::string& b) const {
  const auto* ba = block_of(a);
  return ba && ba == block_of(b);
}

const std::vector<std::string>* ObservationPartition::block_of(const std::string& o) const {
  for (const auto& block : blocks)
    if (std::find(block.begin(), block.end(), o) != block.end()) return &block;
  return nullptr;
}

bool ObservationPartition::is_identity() const {
  return std::all_of(blocks.begin(), blocks.end(),
                     [](const auto& block) { return block.size() == 1; });
}

std::string ObservationPartition::block_name(const std::string& o) const {
  const auto* block = block_of(o);
  if (!block) throw std::invalid_argument("label not covered by unification: " + o);
  return class_name(*block);
}

bool ObservationPartition::contained_in(const ObservationPartition& coarser) const {
  for (const auto& block : blocks) {
    for (std::size_t i = 1; i < block.size(); ++i)
      if (!coarser.related(block[0], block[i])) return false;
  }
  return true;
}

ObservationPartition make_observation_partition(
    const TransitionNetwork& net, const std::vector<std::vector<std::string>>& blocks) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < net.observations.size(); ++i)
    index.emplace(net.observations[i], static_cast<int>(i));
  std::set<std::string> covered;
  std::vector<std::vector<int>> by_block;
  for (const auto& block : blocks) {
    if (block.empty()) throw std::invalid_argument("empty unification block");
    std::vector<int> ids;
    for (const std::string& o : block) {
      auto it = index.find(o);
      if (it == index.end())
        throw std::invalid_argument("unification names unknown label " + o);
      if (!covered.insert(o).second)
        throw std::invalid_argument("unification repeats label " + o);
      ids.push_back(it->second);
    }
    by_block.push_back(std::move(ids));
  }
  if (covered.size() != net.observations.size())
    throw std::invalid_argument("unification does not cover all observation labels");

  // Canonical form: order blocks by least member index, members likewise.
  for (auto& ids : by_block) std::sort(ids.begin(), ids.end());
  std::sort(by_block.begin(), by_block.end());
  ObservationPartition out;
  for (const auto& ids : by_block) {
    std::vector<std::string> members;
    for (int id : ids) members.push_back(net.observations[static_cast<std::size_t>(id)]);
    out.blocks.push_back(std::move(members));
  }
  return out;
}

ObservationPartition compute_ustar(const TransitionNetwork& net) {
  StatePartition rstar = compute_rstar(net);

  std::map<std::string, int> index;
  for (std::size_t i = 0; i < net.observations.size(); ++i)
    index.emplace(net.observations[i], static_cast<int>(i));
  std::vector<int> parent(net.observations.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
    return x;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent[static_cast<std::size_t>(b)] = a;
  };

  const auto low = net.low_agents();
  for (const auto& block : rstar.blocks) {
    for (std::size_t i = 0; i < block.size(); ++i) {
      for (std::size_t j = i + 1; j < block.size(); ++j) {
        for (const std::string& l : low)
          unite(index.at(net.obs_of(block[i], l)), index.at(net.obs_of(block[j], l)));
      }
    }
  }

  std::map<int, std::vector<std::string>> by_root;
  for (std::size_t i = 0; i < net.observations.size(); ++i)
    by_root[find(static_cast<int>(i))].push_back(net.observations[i]);
  ObservationPartition out;
  for (auto& [root, members] : by_root) out.blocks.push_back(std::move(members));
  return out;
}

TransitionNetwork apply_unification(const TransitionNetwork& net,
                                    const ObservationPartition& unification) {
  std::set<std::string> covered;
  for (const auto& block : unification.blocks)
    for (const std::string& o : block) {
      if (!net.has_observation(o))
        throw std::invalid_argument("unification names unknown label " + o);
      covered.insert(o);
    }
  if (covered.size() != net.observations.size())
    throw std::invalid_argument("unification does not cover all observation labels");

  TransitionNetwork out = net;
  out.observations.clear();
  std::set<std::string> emitted;
  for (const std::string& o : net.observations) {
    std::string name = unification.block_name(o);
    if (emitted.insert(name).second) out.observations.push_back(name);
  }
  for (auto& [key, label] : out.obs) label = unification.block_name(label);
  return out;
}

IdealizationResult idealize(const TransitionNetwork& net) {
  ValidationReport report = validate_network(net);
  if (!report.ok())
    throw std::invalid_argument("malformed network: " + report.violations.front().message);

  IdealizationResult result;
  TransitionNetwork base;
  if (net.is_total()) {
    result.provenance = IdealizationProvenance::total;
    base = net;
  } else {
    result.provenance = IdealizationProvenance::ptn;
    base = totalize_low(net, net.low_agents());
  }
  result.unification = compute_ustar(base);
  result.network = apply_unification(base, result.unification);
  result.network.name = net.name.empty() ? "ideal" : net.name + "_ideal";

  // Unification rewrites high observations too; if that merged labels a high
  // agent relied on to tell its repertoires apart, surface it.
  ValidationReport after = validate_network(result.network);
  for (const Violation& v : after.violations) {
    if (v.kind != ViolationKind::availability_awareness) continue;
    if (v.items.size() == 3 && result.network.role_of(v.items[2]) == Role::high)
      result.warnings.push_back("unification breaks availability-awareness for high agent " +
                                v.items[2] + ": " + v.message);
  }
  return result;
}

MinimalityReport check_minimality(const TransitionNetwork& net,
                                  const ObservationPartition& unification,
                                  std::uint64_t budget) {
  TransitionNetwork base = net.is_total() ? net : totalize_low(net, net.low_agents());

  std::uint64_t combinations = 1;
  for (const auto& block : unification.blocks) {
    combinations *= bell_number(block.size());
    if (combinations > budget)
      throw BudgetError("minimality check would enumerate more than " +
                        std::to_string(budget) + " refinements");
  }

  // Cartesian product of per-block set partitions = all refinements of the
  // unification (including itself, skipped below).
  std::vector<std::vector<std::vector<std::vector<std::string>>>> per_block;
  for (const auto& block : unification.blocks) {
    std::vector<std::vector<std::vector<std::string>>> options;
    enumerate_partitions(block, [&](const std::vector<std::vector<std::string>>& p) {
      options.push_back(p);
    });
    per_block.push_back(std::move(options));
  }

  std::vector<ObservationPartition> candidates;
  std::vector<std::size_t> pick(per_block.size(), 0);
  while (true) {
    std::vector<std::vector<std::string>> blocks;
    for (std::size_t i = 0; i < per_block.size(); ++i)
      for (const auto& sub : per_block[i][pick[i]]) blocks.push_back(sub);
    ObservationPartition candidate = make_observation_partition(base, blocks);
    if (!(candidate == unification)) candidates.push_back(std::move(candidate));
    std::size_t i = 0;
    for (; i < pick.size(); ++i) {
      if (++pick[i] < per_block[i].size()) break;
      pick[i] = 0;
    }
    if (i == pick.size()) break;
  }

  // Finest first, so the identity refinement is reported when everything
  // already satisfies noninterference.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const ObservationPartition& a, const ObservationPartition& b) {
                     return a.blocks.size() > b.blocks.size();
                   });

  MinimalityReport report;
  for (const ObservationPartition& candidate : candidates) {
    ++report.refinements_checked;
    if (check_ni_exact(apply_unification(base, candidate)).holds) {
      report.minimal = false;
      report.counterexample = candidate;
      return report;
    }
  }
  report.minimal = true;
  return report;
}

}  // namespace effsec
