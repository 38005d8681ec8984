#include "spatter/derivation.hpp"

#include <algorithm>
#include <array>

#include "spatter/error.hpp"

namespace spatter {

Sentence Sentence::from_words(std::span<const std::string> words, const Vocabularies& vocab) {
  Sentence s;
  s.surface.assign(words.begin(), words.end());
  s.word_ids.reserve(words.size());
  for (const auto& w : words) s.word_ids.push_back(vocab.word_id(w));
  return s;
}

DerivationRules DerivationRules::from(const Vocabularies& vocab, const HeadRuleTable& table,
                                      int max_unary_chain) {
  DerivationRules r;
  r.tag_count = static_cast<int>(vocab.tags.size());
  r.label_count = static_cast<int>(vocab.labels.size());
  r.max_unary_chain = max_unary_chain;
  r.heads = CompiledHeadRules(table, vocab);
  return r;
}

DerivationState DerivationState::initial(std::shared_ptr<const Sentence> sentence) {
  if (!sentence || sentence->size() == 0) throw Error(Errc::EmptyInput, "empty sentence");
  DerivationState s;
  s.active_.reserve(sentence->size());
  for (std::size_t i = 0; i < sentence->size(); ++i) {
    auto leaf = std::make_shared<ParseNode>();
    leaf->word = sentence->word_ids[i];
    leaf->first = leaf->last = static_cast<int>(i);
    s.active_.push_back(std::move(leaf));
  }
  s.sentence_ = std::move(sentence);
  return s;
}

ModelKind DerivationState::decision_kind() const {
  const ParseNode& n = decision_node();
  if (n.is_leaf()) return n.tag == kNull ? ModelKind::Tag : ModelKind::Extension;
  return n.label == kNull ? ModelKind::Label : ModelKind::Extension;
}

PendingStatus DerivationState::status(std::size_t i) const {
  const int ext = active_.at(i)->extension;
  if (ext == static_cast<int>(Extension::Right)) return PendingStatus::OpenRight;
  if (ext == static_cast<int>(Extension::Up)) return PendingStatus::OpenUp;
  if (ext == kNull) return PendingStatus::AwaitingFeatures;
  return PendingStatus::Closed;
}

LegalActions DerivationState::legal_actions(const DerivationRules& rules) const {
  LegalActions out;
  if (complete_) return out;
  out.kind = decision_kind();
  switch (out.kind) {
    case ModelKind::Tag:
      out.values.resize(static_cast<std::size_t>(rules.tag_count));
      for (int i = 0; i < rules.tag_count; ++i) out.values[static_cast<std::size_t>(i)] = i;
      return out;
    case ModelKind::Label:
      out.values.resize(static_cast<std::size_t>(rules.label_count));
      for (int i = 0; i < rules.label_count; ++i) out.values[static_cast<std::size_t>(i)] = i;
      return out;
    case ModelKind::Extension:
      break;
  }

  const ParseNode& n = decision_node();
  const int last_word = static_cast<int>(sentence_->size()) - 1;
  const bool whole = n.first == 0 && n.last == last_word;
  const bool at_end = n.last == last_word;
  const bool has_left = cursor_ > 0;
  // right/up need a later sibling, so they are dead at the sentence end.
  if (!at_end) out.values.push_back(static_cast<int>(Extension::Right));
  if (has_left) out.values.push_back(static_cast<int>(Extension::Left));
  if (has_left && !at_end) out.values.push_back(static_cast<int>(Extension::Up));
  if (n.unary_depth < rules.max_unary_chain) out.values.push_back(static_cast<int>(Extension::Unary));
  if (whole && active_.size() == 1 && !n.is_leaf())
    out.values.push_back(static_cast<int>(Extension::Root));
  return out;
}

bool DerivationState::is_legal(const DerivationRules& rules, Action action) const {
  if (complete_ || action.kind != decision_kind()) return false;
  switch (action.kind) {
    case ModelKind::Tag: return action.value >= 0 && action.value < rules.tag_count;
    case ModelKind::Label: return action.value >= 0 && action.value < rules.label_count;
    case ModelKind::Extension: {
      auto legal = legal_actions(rules);
      return std::find(legal.values.begin(), legal.values.end(), action.value) !=
             legal.values.end();
    }
  }
  return false;
}

DerivationState DerivationState::apply(const DerivationRules& rules, Action action) const {
  if (!is_legal(rules, action))
    throw Error(Errc::IllegalAction, std::string(model_kind_name(action.kind)) + "=" +
                                         std::to_string(action.value) + " at node " +
                                         std::to_string(cursor_));
  return apply_legal(rules, action);
}

DerivationState DerivationState::apply_legal(const DerivationRules& rules, Action action) const {
  DerivationState next = *this;
  auto node = std::make_shared<ParseNode>(decision_node());

  switch (action.kind) {
    case ModelKind::Tag:
      node->tag = action.value;
      node->label = kTagLabel;
      next.active_[cursor_] = std::move(node);
      return next;

    case ModelKind::Label: {
      node->label = action.value;
      std::vector<int> keys;
      keys.reserve(node->children.size());
      for (const auto& c : node->children)
        keys.push_back(c->is_leaf() ? rules.heads.leaf_key(c->tag) : rules.heads.node_key(c->label));
      const auto& head = *node->children[rules.heads.head_child(action.value, keys)];
      node->word = head.word;
      node->tag = head.tag;
      next.active_[cursor_] = std::move(node);
      return next;
    }

    case ModelKind::Extension:
      break;
  }

  node->extension = action.value;
  switch (static_cast<Extension>(action.value)) {
    case Extension::Right:
    case Extension::Up:
      next.active_[cursor_] = std::move(node);
      ++next.cursor_;
      return next;

    case Extension::Root:
      next.active_[cursor_] = std::move(node);
      next.complete_ = true;
      return next;

    case Extension::Unary: {
      auto parent = std::make_shared<ParseNode>();
      parent->first = node->first;
      parent->last = node->last;
      parent->unary_depth = node->unary_depth + 1;
      parent->children.push_back(std::move(node));
      next.active_[cursor_] = std::move(parent);
      return next;
    }

    case Extension::Left: {
      // Children: the open-right node, any open-up nodes after it, then this.
      std::size_t start = cursor_ - 1;
      while (status(start) == PendingStatus::OpenUp) --start;
      auto parent = std::make_shared<ParseNode>();
      parent->first = active_[start]->first;
      parent->last = node->last;
      parent->children.assign(active_.begin() + static_cast<std::ptrdiff_t>(start),
                              active_.begin() + static_cast<std::ptrdiff_t>(cursor_));
      parent->children.push_back(std::move(node));
      next.active_.erase(next.active_.begin() + static_cast<std::ptrdiff_t>(start) + 1,
                         next.active_.begin() + static_cast<std::ptrdiff_t>(cursor_) + 1);
      next.active_[start] = std::move(parent);
      next.cursor_ = start;
      return next;
    }
  }
  throw Error(Errc::IllegalAction, "bad extension value");
}

const ParseNode* DerivationState::leaf_at(int pos) const {
  if (pos < 0 || pos >= static_cast<int>(sentence_->size())) return nullptr;
  const ParseNode* n = nullptr;
  for (const auto& a : active_)
    if (a->first <= pos && pos <= a->last) {
      n = a.get();
      break;
    }
  while (n && !n->is_leaf()) {
    const ParseNode* down = nullptr;
    for (const auto& c : n->children)
      if (c->first <= pos && pos <= c->last) {
        down = c.get();
        break;
      }
    n = down;
  }
  return n && n->tag != kNull ? n : nullptr;
}

namespace {

RawTree to_raw(const ParseNode& n, const Sentence& s, const Vocabularies& vocab) {
  if (n.is_leaf())
    return RawTree::leaf(s.surface.at(static_cast<std::size_t>(n.first)), vocab.tags.symbol(n.tag));
  std::vector<RawTree> kids;
  kids.reserve(n.children.size());
  for (const auto& c : n.children) kids.push_back(to_raw(*c, s, vocab));
  return RawTree::node(vocab.labels.symbol(n.label), std::move(kids));
}

std::size_t count_nodes(const ParseNode& n) {
  std::size_t k = 1;
  for (const auto& c : n.children) k += count_nodes(*c);
  return k;
}

}  // namespace

RawTree DerivationState::to_tree(const Vocabularies& vocab) const {
  if (!complete_) throw Error(Errc::IllegalAction, "derivation is not complete");
  return to_raw(*active_.front(), *sentence_, vocab);
}

std::size_t DerivationState::node_count() const {
  std::size_t k = 0;
  for (const auto& a : active_) k += count_nodes(*a);
  return k;
}

namespace {

// Returns the unary depth of `t` and folds every node's depth into `best`.
int unary_depth(const RawTree& t, int& best) {
  if (t.is_leaf()) return 0;
  int depth = 0;
  for (const auto& c : t.children) {
    const int d = unary_depth(c, best);
    if (t.children.size() == 1) depth = d + 1;
  }
  best = std::max(best, depth);
  return depth;
}

void post_order(const RawTree& t, const Vocabularies& vocab, bool is_root, Extension ext,
                std::vector<Action>& out) {
  if (t.is_leaf()) {
    out.push_back({ModelKind::Tag, vocab.tag_id(t.tag)});
  } else {
    const std::size_t n = t.children.size();
    for (std::size_t i = 0; i < n; ++i) {
      Extension e = n == 1            ? Extension::Unary
                    : i == 0          ? Extension::Right
                    : i + 1 == n      ? Extension::Left
                                      : Extension::Up;
      post_order(t.children[i], vocab, false, e, out);
    }
    out.push_back({ModelKind::Label, vocab.label_id(t.label)});
  }
  out.push_back({ModelKind::Extension, static_cast<int>(is_root ? Extension::Root : ext)});
}

}  // namespace

int max_unary_chain(const RawTree& tree) {
  int best = 0;
  unary_depth(tree, best);
  return best;
}

std::vector<Action> gold_actions(const RawTree& tree, const Vocabularies& vocab) {
  if (tree.is_leaf()) throw Error(Errc::NonContiguousTree, "tree root is a bare leaf");
  std::vector<Action> out;
  post_order(tree, vocab, true, Extension::Root, out);
  return out;
}

DerivationState replay(std::shared_ptr<const Sentence> sentence, std::span<const Action> actions,
                       const DerivationRules& rules) {
  auto state = DerivationState::initial(std::move(sentence));
  for (const auto& a : actions) state = state.apply(rules, a);
  return state;
}

std::vector<DerivationEvent> encode(const RawTree& tree, const Vocabularies& vocab,
                                    const DerivationRules& rules) {
  if (const int u = max_unary_chain(tree); u > rules.max_unary_chain)
    throw Error(Errc::UnaryChainTooLong, "unary chain of " + std::to_string(u) +
                                             " exceeds cap " + std::to_string(rules.max_unary_chain));
  const auto actions = gold_actions(tree, vocab);
  const auto words = tree.words();
  auto sentence = std::make_shared<const Sentence>(Sentence::from_words(words, vocab));

  std::vector<DerivationEvent> events;
  events.reserve(actions.size());
  auto state = DerivationState::initial(sentence);
  for (const auto& a : actions) {
    if (state.complete() || state.decision_kind() != a.kind)
      throw Error(Errc::NonContiguousTree, "derivation diverged from tree structure");
    DerivationEvent ev;
    ev.kind = a.kind;
    ev.future = a.value;
    extract_history(state, rules, a.kind, ev.history);
    events.push_back(std::move(ev));
    state = state.apply(rules, a);
  }
  if (!state.complete()) throw Error(Errc::NonContiguousTree, "derivation did not complete");
  return events;
}

// ---------------------------------------------------------------------------
// History extraction

namespace {

constexpr std::array<std::string_view, kQueriedNodes> kNodeNames = {
    "cur", "left1", "left2", "right1", "right2", "child1L", "child2L", "child1R", "child2R"};
constexpr std::array<std::string_view, kSlotsPerNode> kFeatureNames = {
    "word", "tag", "label", "ext", "nchild", "span"};
constexpr std::array<SlotType, kSlotsPerNode> kFeatureTypes = {
    SlotType::Word, SlotType::Tag, SlotType::Label, SlotType::Extension, SlotType::Count,
    SlotType::Count};
constexpr std::array<std::string_view, kTagExtraSlots> kTagExtraNames = {
    "prevword1", "prevtag1", "prevword2", "prevtag2"};
constexpr std::array<SlotType, kTagExtraSlots> kTagExtraTypes = {
    SlotType::Word, SlotType::Tag, SlotType::Word, SlotType::Tag};

const std::vector<SlotType>& layout(ModelKind kind) {
  static const std::vector<SlotType> node_only = [] {
    std::vector<SlotType> v;
    for (int q = 0; q < kQueriedNodes; ++q)
      for (auto t : kFeatureTypes) v.push_back(t);
    return v;
  }();
  static const std::vector<SlotType> with_tag_extras = [] {
    auto v = node_only;
    for (auto t : kTagExtraTypes) v.push_back(t);
    return v;
  }();
  return kind == ModelKind::Tag ? with_tag_extras : node_only;
}

void put_node(const ParseNode* n, const DerivationRules& rules, int* slot) {
  if (!n) {
    std::fill(slot, slot + kSlotsPerNode, kNull);
    return;
  }
  slot[0] = n->word;
  slot[1] = n->tag;
  slot[2] = n->label == kTagLabel ? rules.label_count : n->label;
  slot[3] = n->extension;
  slot[4] = n->child_count();
  slot[5] = n->span();
}

}  // namespace

std::size_t history_size(ModelKind kind) noexcept {
  return kind == ModelKind::Tag ? kNodeSlots + kTagExtraSlots : kNodeSlots;
}

std::span<const SlotType> history_slot_types(ModelKind kind) { return layout(kind); }

std::string history_slot_name(ModelKind kind, std::size_t slot) {
  if (slot < static_cast<std::size_t>(kNodeSlots))
    return std::string(kNodeNames[slot / kSlotsPerNode]) + "." +
           std::string(kFeatureNames[slot % kSlotsPerNode]);
  if (kind == ModelKind::Tag && slot < history_size(kind))
    return std::string(kTagExtraNames[slot - kNodeSlots]);
  throw Error(Errc::SlotLayoutMismatch, "slot " + std::to_string(slot) + " out of range");
}

void extract_history(const DerivationState& state, const DerivationRules& rules, ModelKind kind,
                     std::vector<int>& out) {
  out.assign(history_size(kind), kNull);
  const auto active = state.active();
  const std::size_t c = state.cursor();
  const ParseNode& cur = *active[c];

  auto at = [&](std::ptrdiff_t i) -> const ParseNode* {
    if (i < 0 || i >= static_cast<std::ptrdiff_t>(active.size())) return nullptr;
    return active[static_cast<std::size_t>(i)].get();
  };
  auto child = [&](std::ptrdiff_t i) -> const ParseNode* {
    if (i < 0 || i >= cur.child_count()) return nullptr;
    return cur.children[static_cast<std::size_t>(i)].get();
  };
  const auto ci = static_cast<std::ptrdiff_t>(c);
  const std::ptrdiff_t nc = cur.child_count();
  const std::array<const ParseNode*, kQueriedNodes> nodes = {
      &cur,      at(ci - 1),     at(ci - 2),     at(ci + 1),    at(ci + 2),
      child(0),  child(1),       child(nc - 1),  child(nc - 2)};
  for (int q = 0; q < kQueriedNodes; ++q) put_node(nodes[static_cast<std::size_t>(q)], rules, out.data() + q * kSlotsPerNode);

  if (kind == ModelKind::Tag) {
    const auto& s = state.sentence();
    for (int back = 1; back <= 2; ++back) {
      const int pos = cur.first - back;
      int* slot = out.data() + kNodeSlots + 2 * (back - 1);
      if (pos < 0) continue;
      slot[0] = s.word_ids[static_cast<std::size_t>(pos)];
      if (const ParseNode* leaf = state.leaf_at(pos)) slot[1] = leaf->tag;
    }
  }
}

std::vector<int> extract_history(const DerivationState& state, const DerivationRules& rules,
                                 ModelKind kind) {
  std::vector<int> out;
  extract_history(state, rules, kind, out);
  return out;
}

namespace {

std::string value_name(SlotType type, int v, const Vocabularies& vocab) {
  if (v == kNull) return "NULL";
  switch (type) {
    case SlotType::Word: return vocab.words.symbol(v);
    case SlotType::Tag: return vocab.tags.symbol(v);
    case SlotType::Label:
      return v == static_cast<int>(vocab.labels.size()) ? "<tag>" : vocab.labels.symbol(v);
    case SlotType::Extension: return std::string(extension_name(static_cast<Extension>(v)));
    case SlotType::Count: return std::to_string(v);
  }
  return "?";
}

}  // namespace

std::string format_event(const DerivationEvent& event, const Vocabularies& vocab) {
  std::string out(model_kind_name(event.kind));
  out += '\t';
  switch (event.kind) {
    case ModelKind::Tag: out += vocab.tags.symbol(event.future); break;
    case ModelKind::Label: out += vocab.labels.symbol(event.future); break;
    case ModelKind::Extension: out += extension_name(static_cast<Extension>(event.future)); break;
  }
  out += '\t';
  const auto types = history_slot_types(event.kind);
  for (std::size_t i = 0; i < event.history.size(); ++i) {
    if (i) out += ',';
    out += history_slot_name(event.kind, i);
    out += '=';
    out += value_name(types[i], event.history[i], vocab);
  }
  return out;
}

}  // namespace spatter
