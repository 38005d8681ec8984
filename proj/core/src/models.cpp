#include "spatter/models.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "spatter/error.hpp"

namespace spatter {

namespace {

void leaf_ids(const RawTree& t, const Vocabularies& v, std::vector<int>& words,
              std::vector<int>& tags) {
  if (t.is_leaf()) {
    words.push_back(v.word_id(t.word));
    tags.push_back(v.tag_id(t.tag));
    return;
  }
  for (const auto& c : t.children) leaf_ids(c, v, words, tags);
}

void sibling_pairs(const RawTree& t, const Vocabularies& v, BigramCounts& out) {
  if (t.is_leaf()) return;
  const int tag_label = static_cast<int>(v.labels.size());
  auto key = [&](const RawTree& c) { return c.is_leaf() ? tag_label : v.label_id(c.label); };
  for (std::size_t i = 0; i + 1 < t.children.size(); ++i)
    out.add(key(t.children[i]), key(t.children[i + 1]));
  for (const auto& c : t.children) sibling_pairs(c, v, out);
}

}  // namespace

BigramCounts word_bigrams(std::span<const RawTree> trees, const Vocabularies& vocab) {
  BigramCounts out;
  std::vector<int> words, tags;
  for (const auto& t : trees) {
    words.clear();
    tags.clear();
    leaf_ids(t, vocab, words, tags);
    for (std::size_t i = 0; i + 1 < words.size(); ++i) out.add(words[i], words[i + 1]);
  }
  return out;
}

BigramCounts tag_bigrams(std::span<const RawTree> trees, const Vocabularies& vocab) {
  BigramCounts out;
  std::vector<int> words, tags;
  for (const auto& t : trees) {
    words.clear();
    tags.clear();
    leaf_ids(t, vocab, words, tags);
    for (std::size_t i = 0; i + 1 < tags.size(); ++i) out.add(tags[i], tags[i + 1]);
  }
  return out;
}

BigramCounts label_bigrams(std::span<const RawTree> trees, const Vocabularies& vocab) {
  BigramCounts out;
  for (const auto& t : trees) sibling_pairs(t, vocab, out);
  return out;
}

ClassSet build_classes(std::span<const RawTree> trees, const TrainConfig& config) {
  ClassSet cs;
  cs.vocab = build_vocabularies(trees, config.unk_threshold);
  const auto& v = cs.vocab;
  auto& tr = cs.trees;
  tr[static_cast<std::size_t>(SlotType::Word)] = std::make_shared<const ClassTree>(
      ClassTree::build(v.words.size(), word_bigrams(trees, v), config.word_bits, config.class_window));
  tr[static_cast<std::size_t>(SlotType::Tag)] = std::make_shared<const ClassTree>(
      ClassTree::build(v.tags.size(), tag_bigrams(trees, v), config.tag_bits, config.class_window));
  tr[static_cast<std::size_t>(SlotType::Label)] = std::make_shared<const ClassTree>(
      ClassTree::build(v.labels.size() + 1, label_bigrams(trees, v), config.label_bits,
                       config.class_window));
  tr[static_cast<std::size_t>(SlotType::Extension)] =
      std::make_shared<const ClassTree>(ClassTree::balanced(kExtensionCount, 3));
  return cs;
}

Schema make_schema(ModelKind kind, const Schema::ClassTrees& trees) {
  const auto types = history_slot_types(kind);
  return Schema(std::vector<SlotType>(types.begin(), types.end()), trees);
}

ModelSet::ModelSet(ClassSet classes, HeadRuleTable head_rules, int max_unary_chain,
                   std::array<SmoothedModel, kModelKinds> models, TrainConfig config)
    : classes_(std::move(classes)),
      head_rules_(std::move(head_rules)),
      models_(std::move(models)),
      config_(config) {
  rules_ = DerivationRules::from(classes_.vocab, head_rules_, max_unary_chain);
  for (int k = 0; k < kModelKinds; ++k) {
    const auto kind = static_cast<ModelKind>(k);
    schemas_[static_cast<std::size_t>(k)] = make_schema(kind, classes_.trees);
    const auto& m = models_[static_cast<std::size_t>(k)];
    if (m.tree().slot_count() != history_size(kind))
      throw Error(Errc::SlotLayoutMismatch, std::string(model_kind_name(kind)) +
                                                " model has the wrong slot layout");
  }
  const std::array<std::size_t, kModelKinds> futures = {
      classes_.vocab.tags.size(), static_cast<std::size_t>(kExtensionCount),
      classes_.vocab.labels.size()};
  for (int k = 0; k < kModelKinds; ++k)
    if (models_[static_cast<std::size_t>(k)].future_count() != futures[static_cast<std::size_t>(k)])
      throw Error(Errc::BadModelFile, std::string(model_kind_name(static_cast<ModelKind>(k))) +
                                          " model future vocabulary does not match");
}

std::span<const double> ModelSet::distribution(const DerivationState& state, ModelKind kind,
                                               std::vector<int>& scratch) const {
  extract_history(state, rules_, kind, scratch);
  return model(kind).predict(schema(kind), scratch);
}

double ModelSet::score_action(const DerivationState& state, Action action) const {
  if (!state.is_legal(rules_, action))
    throw Error(Errc::IllegalAction, "action is not legal in this state");
  std::vector<int> scratch;
  const auto dist = distribution(state, action.kind, scratch);
  const double p = dist[static_cast<std::size_t>(action.value)];
  if (!config_.renormalize) return p;
  double legal = 0.0;
  for (int v : state.legal_actions(rules_).values) legal += dist[static_cast<std::size_t>(v)];
  return p / legal;
}

double ModelSet::derivation_log_prob(const RawTree& tree) const {
  const auto actions = gold_actions(tree, vocab());
  auto state = DerivationState::initial(sentence(tree.words()));
  double lp = 0.0;
  for (const auto& a : actions) {
    lp += std::log(score_action(state, a));
    state = state.apply(rules_, a);
  }
  return lp;
}

std::shared_ptr<const Sentence> ModelSet::sentence(std::span<const std::string> words) const {
  return std::make_shared<const Sentence>(Sentence::from_words(words, vocab()));
}

namespace {

void route(std::span<const RawTree> trees, std::string_view which, const Vocabularies& vocab,
           const DerivationRules& rules, std::array<EventSet, kModelKinds>& sets) {
  for (std::size_t i = 0; i < trees.size(); ++i) {
    std::vector<DerivationEvent> events;
    try {
      events = encode(trees[i], vocab, rules);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(which) + " tree " + std::to_string(i) + ": " + e.what());
    }
    for (const auto& ev : events) sets[static_cast<std::size_t>(ev.kind)].add(ev.history, ev.future);
  }
}

}  // namespace

ModelSet train(std::span<const RawTree> grow, std::span<const RawTree> smooth,
               const ClassSet& classes, const HeadRuleTable& head_rules,
               const TrainConfig& config, TrainingReport* report) {
  if (grow.empty()) throw Error(Errc::EmptyCorpus, "no trees for growing");
  TrainingReport local;
  TrainingReport& rep = report ? *report : local;
  rep = {};

  int unary = config.max_unary_chain;
  if (unary < 0) {
    unary = 0;
    for (const auto& t : grow) unary = std::max(unary, max_unary_chain(t));
    for (const auto& t : smooth) unary = std::max(unary, max_unary_chain(t));
    if (unary == 0) unary = 4;
  }
  rep.max_unary_chain = unary;
  const auto rules = DerivationRules::from(classes.vocab, head_rules, unary);

  auto empty_sets = [] {
    return std::array<EventSet, kModelKinds>{EventSet(history_size(ModelKind::Tag)),
                                             EventSet(history_size(ModelKind::Extension)),
                                             EventSet(history_size(ModelKind::Label))};
  };
  auto grow_sets = empty_sets();
  auto smooth_sets = empty_sets();
  route(grow, "grow", classes.vocab, rules, grow_sets);
  route(smooth, "smooth", classes.vocab, rules, smooth_sets);

  const std::array<std::size_t, kModelKinds> futures = {
      classes.vocab.tags.size(), static_cast<std::size_t>(kExtensionCount),
      classes.vocab.labels.size()};
  std::array<SmoothedModel, kModelKinds> models;
  for (int k = 0; k < kModelKinds; ++k) {
    const auto kind = static_cast<ModelKind>(k);
    const auto i = static_cast<std::size_t>(k);
    rep.grow_events[i] = grow_sets[i].size();
    rep.smooth_events[i] = smooth_sets[i].size();
    const Schema schema = make_schema(kind, classes.trees);
    auto tree = DecisionTree::grow(grow_sets[i], schema, futures[i], config.grow);
    models[i] = SmoothedModel::smooth(std::move(tree), smooth_sets[i], schema, config.smooth,
                                      &rep.smoothing[i]);
  }
  return ModelSet(classes, head_rules, unary, std::move(models), config);
}

}  // namespace spatter
