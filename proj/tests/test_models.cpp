#include <cmath>

#include "doctest.h"
#include "spatter/error.hpp"
#include "spatter/models.hpp"
#include "toy.hpp"

using namespace spatter;

namespace {

const testing::ToyModel& toy() {
  static const auto t = testing::train_toy();
  return t;
}

}  // namespace

TEST_CASE("class trees cover their inventories") {
  const auto& m = toy().models;
  const auto& c = m.classes();
  CHECK(c.word_tree().size() == m.vocab().words.size());
  CHECK(c.tag_tree().size() == m.vocab().tags.size());
  CHECK(c.label_tree().size() == m.vocab().labels.size() + 1);
  CHECK(c.trees[static_cast<std::size_t>(SlotType::Extension)]->size() == kExtensionCount);
  CHECK(c.word_tree().budget() == 12);
  CHECK(c.tag_tree().budget() == 8);
}

TEST_CASE("bigram statistics") {
  const auto trees = parse_treebank("(S (NP a_X b_Y) c_Z)", TreeFormat::UnderscoreSuffix);
  const auto v = build_vocabularies(trees, 1);
  const auto w = word_bigrams(trees, v);
  CHECK(w.total() == 2);
  const auto t = tag_bigrams(trees, v);
  CHECK(t.entries().count({v.tag_id("X"), v.tag_id("Y")}) == 1);
  // Sibling label pairs; the tagged word c stands in as the extra item.
  const auto l = label_bigrams(trees, v);
  const int taglabel = static_cast<int>(v.labels.size());
  CHECK(l.entries().count({v.label_id("NP"), taglabel}) == 1);
}

TEST_CASE("training report counts events per model") {
  const auto treebank = testing::toy_treebank(30, 3);
  const auto config = testing::toy_train_config();
  const auto classes = build_classes(treebank, config);
  const std::vector<RawTree> grow(treebank.begin(), treebank.begin() + 25);
  const std::vector<RawTree> smooth(treebank.begin() + 25, treebank.end());
  TrainingReport report;
  const auto m = train(grow, smooth, classes, testing::toy_head_rules(), config, &report);

  std::size_t leaves = 0, internal = 0;
  for (const auto& t : grow) {
    leaves += t.leaf_count();
    internal += t.internal_count();
  }
  CHECK(report.grow_events[static_cast<std::size_t>(ModelKind::Tag)] == leaves);
  CHECK(report.grow_events[static_cast<std::size_t>(ModelKind::Label)] == internal);
  CHECK(report.grow_events[static_cast<std::size_t>(ModelKind::Extension)] == leaves + internal);
  CHECK(report.smoothing[0].used_heldout);
  // The toy grammar has a unary NP over NNP but no longer chains.
  CHECK(report.max_unary_chain == 1);
  CHECK(m.max_unary_chain() == 1);
}

TEST_CASE("derivation probability is the product of its decisions") {
  const auto& m = toy().models;
  const auto& tree = toy().treebank.front();
  const auto actions = gold_actions(tree, m.vocab());
  auto state = DerivationState::initial(m.sentence(tree.words()));
  double lp = 0.0;
  for (const auto& a : actions) {
    const double p = m.score_action(state, a);
    CHECK(p > 0.0);
    CHECK(p <= 1.0);
    lp += std::log(p);
    state = state.apply(m.rules(), a);
  }
  CHECK(m.derivation_log_prob(tree) == lp);
}

TEST_CASE("illegal actions are rejected when scoring") {
  const auto& m = toy().models;
  const auto state = DerivationState::initial(m.sentence(toy().treebank.front().words()));
  CHECK_THROWS_AS(m.score_action(state, {ModelKind::Extension, 0}), Error);
}

TEST_CASE("unknown words fall back to the unknown class") {
  const auto& m = toy().models;
  const std::vector<std::string> words = {"the", "zebra", "slept"};
  const auto s = m.sentence(words);
  CHECK(s->word_ids[1] == Vocabularies::kUnk);
  CHECK(s->surface[1] == "zebra");
}

TEST_CASE("training errors name the offending tree") {
  const auto good = testing::toy_treebank(5, 1);
  auto bad = good;
  bad.push_back(parse_tree("(S (A (B (C x_NN))))", TreeFormat::UnderscoreSuffix));
  auto config = testing::toy_train_config();
  config.max_unary_chain = 1;
  const auto classes = build_classes(bad, config);
  try {
    train(bad, {}, classes, testing::toy_head_rules(), config);
    FAIL("expected UnaryChainTooLong");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnaryChainTooLong);
    CHECK(std::string(e.what()).find("tree 5") != std::string::npos);
  }
}
