#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "effsec/analysis.hpp"
#include "effsec/games.hpp"
#include "effsec/idealization.hpp"
#include "effsec/noninterference.hpp"
#include "effsec/parser.hpp"

namespace {

effsec::ModelDocument load(const std::string& name) {
  std::ifstream in(std::string(EFFSEC_FIXTURE_DIR) + "/" + name);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return *effsec::parse_model(buffer.str()).document;
}

// A chain of n observation-distinct segments: one high step opens each
// segment, low probes walk inside it. Scales the fixpoints without changing
// their shape.
effsec::TransitionNetwork chain(int n) {
  effsec::TransitionNetwork net;
  net.name = "chain";
  net.agents = {{"H", effsec::Role::high}, {"L", effsec::Role::low}};
  net.actions = {"step", "probe"};
  for (int i = 0; i < n; ++i) {
    std::string s = "s" + std::to_string(i);
    std::string o = "o" + std::to_string(i / 2);
    net.states.push_back(s);
    if (!net.has_observation(o)) net.observations.push_back(o);
    net.obs[{s, "H"}] = o;
    net.obs[{s, "L"}] = o;
  }
  net.initial = "s0";
  for (int i = 0; i + 1 < n; ++i) {
    std::string s = "s" + std::to_string(i);
    std::string t = "s" + std::to_string(i + 1);
    if (i % 2 == 0)
      net.transitions[{s, "H", "step"}] = t;
    else
      net.transitions[{s, "L", "probe"}] = t;
  }
  return net;
}

void BM_ParseFixture(benchmark::State& state) {
  std::ifstream in(std::string(EFFSEC_FIXTURE_DIR) + "/Mb.tn");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  for (auto _ : state) benchmark::DoNotOptimize(effsec::parse_model(text));
}
BENCHMARK(BM_ParseFixture);

void BM_RStarFixture(benchmark::State& state) {
  effsec::ModelDocument doc = load("Mb.tn");
  for (auto _ : state) benchmark::DoNotOptimize(effsec::compute_rstar(doc.network));
}
BENCHMARK(BM_RStarFixture);

void BM_RStarChain(benchmark::State& state) {
  effsec::TransitionNetwork net = chain(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(effsec::compute_rstar(net));
}
BENCHMARK(BM_RStarChain)->Arg(16)->Arg(64)->Arg(128);

void BM_IdealizeFixture(benchmark::State& state) {
  effsec::ModelDocument doc = load("Mb.tn");
  for (auto _ : state) benchmark::DoNotOptimize(effsec::idealize(doc.network));
}
BENCHMARK(BM_IdealizeFixture);

void BM_ArenaFixture(benchmark::State& state) {
  effsec::ModelDocument doc = load("Mb.tn");
  for (auto _ : state) benchmark::DoNotOptimize(effsec::build_belief_arena(doc.network, "L"));
}
BENCHMARK(BM_ArenaFixture);

void BM_SolveFairFixture(benchmark::State& state) {
  effsec::ModelDocument doc = load("Mb.tn");
  effsec::BeliefArena arena = effsec::build_belief_arena(doc.network, "L");
  effsec::Goal goal = negate_goal(doc.goals.at("Gsys"));
  for (auto _ : state)
    benchmark::DoNotOptimize(effsec::solve_fair(doc.network, arena, goal));
}
BENCHMARK(BM_SolveFairFixture);

void BM_BoundedNIFixture(benchmark::State& state) {
  effsec::ModelDocument doc = load("Ma.tn");
  for (auto _ : state) benchmark::DoNotOptimize(effsec::check_ni_bounded(doc.network, 12));
}
BENCHMARK(BM_BoundedNIFixture);

}  // namespace

BENCHMARK_MAIN();
