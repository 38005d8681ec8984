#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "doctest.h"
#include "spatter/dtm.hpp"
#include "spatter/error.hpp"

using namespace spatter;

namespace {

Schema count_schema(std::size_t slots) {
  return Schema(std::vector<SlotType>(slots, SlotType::Count), {});
}

// Root split on "slot 0 <= 1" into two leaves of 8 events each.
DecisionTree two_level_tree() {
  std::vector<DTNode> nodes(3);
  nodes[0].is_leaf = false;
  nodes[0].question = {0, QuestionKind::Threshold, 1};
  nodes[0].yes = 1;
  nodes[0].no = 2;
  nodes[0].total = 16;
  nodes[0].counts = {7, 2, 7};
  nodes[1].parent = nodes[2].parent = 0;
  nodes[1].depth = nodes[2].depth = 1;
  nodes[1].total = nodes[2].total = 8;
  nodes[1].counts = {6, 1, 1};
  nodes[2].counts = {1, 1, 6};
  return DecisionTree(std::move(nodes), 3, 1);
}

EventSet two_level_heldout() {
  EventSet h(1);
  const std::vector<std::pair<int, int>> events = {{0, 0}, {0, 0}, {1, 0}, {0, 1}, {1, 1}, {0, 2},
                                                   {5, 2}, {5, 2}, {6, 2}, {5, 1}, {7, 1}, {5, 0}};
  for (auto [x, f] : events) h.add(std::vector<int>{x}, f);
  return h;
}

}  // namespace

TEST_CASE("questions per slot type") {
  auto tags = std::make_shared<const ClassTree>(ClassTree::balanced(5, 8));
  Schema::ClassTrees trees{};
  trees[static_cast<std::size_t>(SlotType::Tag)] = tags;
  const Schema s({SlotType::Tag, SlotType::Count}, trees);
  const auto q0 = s.questions_for(0);
  CHECK(q0.size() == 1 + 3);  // null + usable bits
  CHECK(s.questions_for(1).size() == 1 + 11);
  const auto all = s.questions();
  CHECK(all.size() == 16);
  CHECK(std::is_sorted(all.begin(), all.end()));

  const std::vector<int> h = {kNull, 4};
  CHECK(s.answer({0, QuestionKind::IsNull, 0}, h));
  CHECK_FALSE(s.answer({0, QuestionKind::Bit, 0}, h));
  CHECK(s.answer({1, QuestionKind::Threshold, 4}, h));
  CHECK_FALSE(s.answer({1, QuestionKind::Threshold, 3}, h));
  CHECK_THROWS_AS(Schema({SlotType::Word}, {}), Error);
}

TEST_CASE("growing finds a separating threshold") {
  EventSet ev(2);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const int x = static_cast<int>(rng() % 6);
    const int noise = static_cast<int>(rng() % 6);
    ev.add(std::vector<int>{x, noise}, x <= 2 ? 0 : 1);
  }
  const auto t = DecisionTree::grow(ev, count_schema(2), 2);
  REQUIRE_FALSE(t.node(0).is_leaf);
  CHECK(t.node(0).question == Question{0, QuestionKind::Threshold, 2});
  CHECK(t.node(0).gain > 0.9);
  CHECK(t.leaf_count() == 2);
  for (const auto& n : t.nodes())
    if (n.is_leaf) CHECK(std::count(n.counts.begin(), n.counts.end(), 0u) == 1);
}

TEST_CASE("equal-gain questions resolve to the lowest slot") {
  EventSet ev(2);
  for (int i = 0; i < 40; ++i) ev.add(std::vector<int>{i % 2 + 1, i % 2 + 1}, i % 2);
  const auto t = DecisionTree::grow(ev, count_schema(2), 2);
  CHECK(t.node(0).question == Question{0, QuestionKind::Threshold, 1});
}

TEST_CASE("stopping rules") {
  EventSet ev(1);
  for (int i = 0; i < 6; ++i) ev.add(std::vector<int>{i}, i % 2);
  CHECK(DecisionTree::grow(ev, count_schema(1), 2).size() == 1);  // fewer than min_events

  EventSet constant(1);
  for (int i = 0; i < 50; ++i) constant.add(std::vector<int>{i % 7}, 0);
  CHECK(DecisionTree::grow(constant, count_schema(1), 2).size() == 1);  // no gain

  GrowConfig shallow;
  shallow.max_depth = 0;
  EventSet split(1);
  for (int i = 0; i < 50; ++i) split.add(std::vector<int>{i % 2}, i % 2);
  CHECK(DecisionTree::grow(split, count_schema(1), 2, shallow).size() == 1);

  CHECK_THROWS_AS(DecisionTree::grow(EventSet(1), count_schema(1), 2), Error);
  CHECK_THROWS_AS(DecisionTree::grow(split, count_schema(2), 2), Error);
}

TEST_CASE("forced-order tree leaves are n-gram relative frequencies") {
  auto tags = std::make_shared<const ClassTree>(ClassTree::balanced(5, 8));
  Schema::ClassTrees trees{};
  trees[static_cast<std::size_t>(SlotType::Tag)] = tags;
  const Schema schema({SlotType::Tag, SlotType::Tag}, trees);

  std::mt19937_64 rng(17);
  EventSet ev(2);
  std::map<std::vector<int>, std::vector<std::uint64_t>> table;
  int p1 = kNull, p2 = kNull;
  for (int i = 0; i < 600; ++i) {
    const int f = static_cast<int>((rng() % 3 + static_cast<unsigned>(p1 + 1)) % 5);
    const std::vector<int> h = {p1, p2};
    ev.add(h, f);
    auto& row = table[h];
    row.resize(5);
    ++row[static_cast<std::size_t>(f)];
    p2 = p1;
    p1 = (i % 40 == 39) ? kNull : f;
  }
  const auto order = schema.questions();
  const auto t = DecisionTree::forced_order(ev, schema, order, 5);
  for (const auto& [h, counts] : table) {
    const auto total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    const auto p = t.empirical(t.leaf_for(schema, h));
    for (std::size_t f = 0; f < 5; ++f)
      CHECK(p[f] == static_cast<double>(counts[f]) / static_cast<double>(total));
  }
}

TEST_CASE("smoothed distributions are strictly positive and normalized") {
  EventSet ev(1), held(1);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 300; ++i) {
    const int x = static_cast<int>(rng() % 10);
    (i % 5 ? ev : held).add(std::vector<int>{x}, x % 3 == 0 ? static_cast<int>(rng() % 2) : 2);
  }
  const auto schema = count_schema(1);
  SmoothingReport report;
  const auto m = SmoothedModel::smooth(DecisionTree::grow(ev, schema, 4), held, schema, {}, &report);
  CHECK(report.used_heldout);
  for (std::size_t id = 0; id < m.tree().size(); ++id) {
    const auto d = m.distribution(static_cast<int>(id));
    double s = 0.0;
    for (double p : d) {
      CHECK(p > 0.0);
      s += p;
    }
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
  for (std::size_t i = 1; i < report.log_likelihood.size(); ++i)
    CHECK(report.log_likelihood[i] >= report.log_likelihood[i - 1] - 1e-9);
  for (double l : m.lambdas()) {
    CHECK(l >= 0.0);
    CHECK(l <= 0.999);
  }
}

TEST_CASE("EM weights match a grid search on the two-level fixture") {
  const auto schema = count_schema(1);
  const auto held = two_level_heldout();
  SmoothingReport report;
  const auto em = SmoothedModel::smooth(two_level_tree(), held, schema, {}, &report);
  const int leaf_bucket = lambda_bucket(8), root_bucket = lambda_bucket(16);

  double best = -1e300, best_leaf = 0, best_root = 0;
  auto lambdas = em.lambdas();
  for (int i = 0; i <= 200; ++i)
    for (int j = 0; j <= 200; ++j) {
      lambdas[static_cast<std::size_t>(leaf_bucket)] = i / 200.0;
      lambdas[static_cast<std::size_t>(root_bucket)] = j / 200.0;
      const double ll = SmoothedModel::with_lambdas(two_level_tree(), lambdas).log_likelihood(schema, held);
      if (ll > best) {
        best = ll;
        best_leaf = i / 200.0;
        best_root = j / 200.0;
      }
    }
  CHECK(std::abs(em.lambdas()[static_cast<std::size_t>(leaf_bucket)] - best_leaf) < 0.02);
  CHECK(std::abs(em.lambdas()[static_cast<std::size_t>(root_bucket)] - best_root) < 0.02);
  // EM stops at a relative change of 1e-6, so it may sit just short of the grid optimum.
  CHECK(em.log_likelihood(schema, held) >= best - 1e-3);
}

TEST_CASE("without heldout data the fixed schedule applies") {
  const auto l = SmoothedModel::fixed_schedule(4, 0.999);
  CHECK(l[0] == doctest::Approx(1.0 / 3.0));
  CHECK(l[1] == doctest::Approx(0.5));
  CHECK(l[2] == doctest::Approx(4.0 / 6.0));
  CHECK(l[3] == doctest::Approx(0.8));
  CHECK(SmoothedModel::fixed_schedule(20, 0.9)[19] == 0.9);

  SmoothingReport report;
  const auto m = SmoothedModel::smooth(two_level_tree(), EventSet(1), count_schema(1), {}, &report);
  CHECK_FALSE(report.used_heldout);
  CHECK(m.lambdas() == SmoothedModel::fixed_schedule(5, 0.999));
}

TEST_CASE("interpolation follows the path from the root") {
  // leaf bucket 3 -> 0.5, root bucket 4 -> 0.25
  std::vector<double> l(5, 0.0);
  l[3] = 0.5;
  l[4] = 0.25;
  const auto m = SmoothedModel::with_lambdas(two_level_tree(), l);
  const double u = 1.0 / 3.0;
  const double root0 = 0.25 * 7.0 / 16.0 + 0.75 * u;
  CHECK(m.distribution(0)[0] == doctest::Approx(root0));
  CHECK(m.distribution(1)[0] == doctest::Approx(0.5 * 6.0 / 8.0 + 0.5 * root0));
  CHECK(m.predict(count_schema(1), std::vector<int>{9})[2] ==
        doctest::Approx(0.5 * 6.0 / 8.0 + 0.5 * (0.25 * 7.0 / 16.0 + 0.75 * u)));
  CHECK_THROWS_AS(m.predict(count_schema(2), std::vector<int>{1, 2}), Error);
}
