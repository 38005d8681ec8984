#include <benchmark/benchmark.h>

#include <random>

#include "spatter/classtree.hpp"
#include "spatter/derivation.hpp"
#include "spatter/dtm.hpp"
#include "spatter/model_io.hpp"
#include "spatter/parseval.hpp"
#include "spatter/search.hpp"
#include "toy.hpp"

using namespace spatter;

namespace {

const testing::ToyModel& toy() {
  static const auto t = testing::train_toy(200, 7);
  return t;
}

BigramCounts zipf_bigrams(int n, int tokens, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = 1.0 / (i + 1);
  std::discrete_distribution<int> pick(w.begin(), w.end());
  BigramCounts b;
  int prev = pick(rng);
  for (int i = 0; i < tokens; ++i) {
    const int cur = (prev * 7 + pick(rng)) % n;
    b.add(prev, cur);
    prev = cur;
  }
  return b;
}

std::vector<std::string> sentence_of_length(std::size_t n) {
  for (const auto& t : testing::toy_treebank(500, 3))
    if (t.leaf_count() == n) return t.words();
  return {};
}

}  // namespace

static void BM_Parse(benchmark::State& state) {
  const auto& models = toy().models;
  const auto words = sentence_of_length(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(parse(models, words));
}
BENCHMARK(BM_Parse)->Arg(2)->Arg(5)->Arg(8)->Arg(11);

static void BM_ExhaustiveParse(benchmark::State& state) {
  const auto& models = toy().models;
  const auto words = sentence_of_length(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(exhaustive_parse(models, words));
}
BENCHMARK(BM_ExhaustiveParse)->Arg(2)->Arg(5)->Arg(8);

static void BM_ClassTreeBuild(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto bigrams = zipf_bigrams(n, 20 * n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(ClassTree::build(static_cast<std::size_t>(n), bigrams, 30));
  state.SetComplexityN(n);
}
BENCHMARK(BM_ClassTreeBuild)->RangeMultiplier(2)->Range(64, 512)->Complexity();

static void BM_ClassTreeWindowed(benchmark::State& state) {
  const auto bigrams = zipf_bigrams(1000, 20000, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(ClassTree::build(1000, bigrams, 30, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_ClassTreeWindowed)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_Encode(benchmark::State& state) {
  const auto& m = toy().models;
  const auto& trees = toy().treebank;
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(encode(trees[i++ % trees.size()], m.vocab(), m.rules()));
}
BENCHMARK(BM_Encode);

static void BM_GrowAndSmooth(benchmark::State& state) {
  const auto& m = toy().models;
  const auto& schema = m.schema(ModelKind::Extension);
  EventSet events(history_size(ModelKind::Extension));
  for (const auto& t : toy().treebank)
    for (const auto& e : encode(t, m.vocab(), m.rules()))
      if (e.kind == ModelKind::Extension) events.add(e.history, e.future);
  GrowConfig g;
  g.min_events = 2;
  for (auto _ : state) {
    auto tree = DecisionTree::grow(events, schema, kExtensionCount, g);
    benchmark::DoNotOptimize(SmoothedModel::smooth(std::move(tree), events, schema));
  }
  state.counters["events"] = static_cast<double>(events.size());
}
BENCHMARK(BM_GrowAndSmooth)->Unit(benchmark::kMillisecond);

static void BM_ModelRoundTrip(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(deserialize_model(serialize(toy().models)));
}
BENCHMARK(BM_ModelRoundTrip);

static void BM_ScorePair(benchmark::State& state) {
  const auto gold = testing::sample_sentence();
  const auto test = parse_tree("(S (N Each_DD1 code_NN1) (Tn used_VVN (P by_II (N the_AT PC_NN1))) (V is_VBZ listed_VVN))",
                               TreeFormat::UnderscoreSuffix);
  for (auto _ : state) benchmark::DoNotOptimize(score_pair(gold, test));
}
BENCHMARK(BM_ScorePair);
BENCHMARK_MAIN();
