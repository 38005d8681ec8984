#include <random>

#include "doctest.h"
#include "spatter/derivation.hpp"
#include "spatter/error.hpp"
#include "toy.hpp"

using namespace spatter;

namespace {

struct Fixture {
  RawTree tree = testing::sample_sentence();
  Vocabularies vocab = build_vocabularies(std::vector<RawTree>{tree}, 1);
  HeadRuleTable heads;
  DerivationRules rules = DerivationRules::from(vocab, heads, 4);

  std::shared_ptr<const Sentence> sentence() const {
    return std::make_shared<const Sentence>(Sentence::from_words(tree.words(), vocab));
  }
};

int ext(Extension e) { return static_cast<int>(e); }

std::string round_trip(const RawTree& tree, const Vocabularies& vocab, const DerivationRules& rules) {
  const auto actions = gold_actions(tree, vocab);
  auto s = std::make_shared<const Sentence>(Sentence::from_words(tree.words(), vocab));
  return to_string(replay(s, actions, rules).to_tree(vocab));
}

}  // namespace

TEST_CASE("sample sentence derivation order and extensions") {
  Fixture f;
  const auto actions = gold_actions(f.tree, f.vocab);
  REQUIRE(actions.size() == 28);

  std::vector<int> extensions;
  std::vector<ModelKind> kinds;
  for (const auto& a : actions) {
    kinds.push_back(a.kind);
    if (a.kind == ModelKind::Extension) extensions.push_back(a.value);
  }
  using E = Extension;
  const std::vector<int> expected = {
      ext(E::Right), ext(E::Up),   ext(E::Right), ext(E::Right), ext(E::Right),
      ext(E::Left),  ext(E::Left), ext(E::Left),  ext(E::Left),  ext(E::Right),
      ext(E::Right), ext(E::Left), ext(E::Left),  ext(E::Root)};
  CHECK(extensions == expected);
  // Each node gets its tag or label immediately before its extension.
  for (std::size_t i = 0; i < kinds.size(); i += 2) {
    CHECK(kinds[i] != ModelKind::Extension);
    CHECK(kinds[i + 1] == ModelKind::Extension);
  }
  CHECK(std::count(kinds.begin(), kinds.end(), ModelKind::Tag) == 8);
  CHECK(std::count(kinds.begin(), kinds.end(), ModelKind::Label) == 6);
}

TEST_CASE("replay reconstructs the sample sentence") {
  Fixture f;
  auto final_state = replay(f.sentence(), gold_actions(f.tree, f.vocab), f.rules);
  CHECK(final_state.complete());
  CHECK(final_state.to_tree(f.vocab) == f.tree);
  CHECK(final_state.node_count() == 14);
}

TEST_CASE("internal nodes carry the head child's word") {
  Fixture f;
  const auto actions = gold_actions(f.tree, f.vocab);
  auto state = DerivationState::initial(f.sentence());
  // Stop right after the root is labelled.
  for (std::size_t i = 0; i + 1 < actions.size(); ++i) state = state.apply(f.rules, actions[i]);
  const auto& root = state.decision_node();
  CHECK(f.vocab.words.symbol(root.word) == "listed");
  CHECK(f.vocab.tags.symbol(root.tag) == "VVN");
  CHECK(root.first == 0);
  CHECK(root.last == 7);
}

TEST_CASE("encode yields one event per decision with fixed-width histories") {
  Fixture f;
  const auto events = encode(f.tree, f.vocab, f.rules);
  REQUIRE(events.size() == 28);
  for (const auto& e : events) CHECK(e.history.size() == history_size(e.kind));
  CHECK(history_size(ModelKind::Tag) == 58);
  CHECK(history_size(ModelKind::Extension) == 54);
  CHECK(history_size(ModelKind::Label) == 54);

  // First event: tagging "Each" with nothing built yet.
  const auto& first = events.front();
  CHECK(first.kind == ModelKind::Tag);
  CHECK(first.history[0] == f.vocab.word_id("Each"));
  CHECK(first.history[1] == kNull);          // cur.tag
  CHECK(first.history[kSlotsPerNode] == kNull);  // left1.word
  CHECK(first.history[kNodeSlots] == kNull);     // prevword1
}

TEST_CASE("slot names") {
  CHECK(history_slot_name(ModelKind::Tag, 0) == "cur.word");
  CHECK(history_slot_name(ModelKind::Tag, kNodeSlots) == "prevword1");
  CHECK(history_slot_types(ModelKind::Tag)[kNodeSlots + 1] == SlotType::Tag);
}

TEST_CASE("legal actions from the initial state") {
  Fixture f;
  const auto s = DerivationState::initial(f.sentence());
  const auto legal = s.legal_actions(f.rules);
  CHECK(legal.kind == ModelKind::Tag);
  CHECK(legal.values.size() == f.vocab.tags.size());
  const auto tagged = s.apply(f.rules, {ModelKind::Tag, 0});
  const auto ext_legal = tagged.legal_actions(f.rules);
  CHECK(ext_legal.kind == ModelKind::Extension);
  // First word: no left neighbour, not a whole-sentence node.
  CHECK(ext_legal.values == std::vector<int>{ext(Extension::Right), ext(Extension::Unary)});
  CHECK_THROWS_AS(tagged.apply(f.rules, {ModelKind::Extension, ext(Extension::Left)}), Error);
  CHECK_THROWS_AS(s.apply(f.rules, {ModelKind::Label, 0}), Error);
}

TEST_CASE("unary chains") {
  const auto t = parse_tree("(A (B x_t))", TreeFormat::UnderscoreSuffix);
  CHECK(max_unary_chain(t) == 2);
  const auto vocab = build_vocabularies(std::vector<RawTree>{t}, 1);
  HeadRuleTable heads;
  const auto actions = gold_actions(t, vocab);
  REQUIRE(actions.size() == 6);
  CHECK(actions[1] == Action{ModelKind::Extension, ext(Extension::Unary)});
  CHECK(actions[3] == Action{ModelKind::Extension, ext(Extension::Unary)});
  CHECK(actions[5] == Action{ModelKind::Extension, ext(Extension::Root)});

  CHECK(round_trip(t, vocab, DerivationRules::from(vocab, heads, 2)) == to_string(t));
  try {
    encode(t, vocab, DerivationRules::from(vocab, heads, 1));
    FAIL("expected UnaryChainTooLong");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnaryChainTooLong);
  }
}

TEST_CASE("a bare leaf cannot be a root") {
  const auto t = parse_tree("(A x_t)", TreeFormat::UnderscoreSuffix);
  const auto vocab = build_vocabularies(std::vector<RawTree>{t}, 1);
  const auto rules = DerivationRules::from(vocab, HeadRuleTable{}, 0);
  auto s = DerivationState::initial(std::make_shared<const Sentence>(Sentence::from_words(t.words(), vocab)));
  s = s.apply(rules, {ModelKind::Tag, 0});
  // One word, no unary allowed: nothing can follow.
  CHECK(s.legal_actions(rules).dead_end());
}

TEST_CASE("property: encode then replay is the identity on random trees") {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 300; ++i) {
    const auto t = testing::random_tree(rng, 9, 2);
    const auto vocab = build_vocabularies(std::vector<RawTree>{t}, 1);
    const auto rules = DerivationRules::from(vocab, HeadRuleTable{}, 2);
    CAPTURE(to_string(t));
    const auto events = encode(t, vocab, rules);
    CHECK(events.size() == 2 * (t.leaf_count() + t.internal_count()));
    CHECK(round_trip(t, vocab, rules) == to_string(t));
  }
}

TEST_CASE("property: every decision state offers its gold action") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 200; ++i) {
    const auto t = testing::random_tree(rng, 7, 1);
    const auto vocab = build_vocabularies(std::vector<RawTree>{t}, 1);
    const auto rules = DerivationRules::from(vocab, HeadRuleTable{}, 1);
    auto s = DerivationState::initial(std::make_shared<const Sentence>(Sentence::from_words(t.words(), vocab)));
    for (const auto& a : gold_actions(t, vocab)) {
      const auto legal = s.legal_actions(rules);
      CHECK(legal.kind == a.kind);
      CHECK(std::find(legal.values.begin(), legal.values.end(), a.value) != legal.values.end());
      s = s.apply_legal(rules, a);
    }
    CHECK(s.complete());
  }
}
