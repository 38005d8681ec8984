#pragma once

#include <compare>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spatter/corpus.hpp"
#include "spatter/headfinder.hpp"
#include "spatter/types.hpp"

namespace spatter {

// Label value carried by tagged leaves (pre-terminals).
inline constexpr int kTagLabel = -2;

struct ParseNode;
using NodePtr = std::shared_ptr<const ParseNode>;

// One node of a (partial) parse. Leaves are words; internal nodes take their
// word and tag from the head child once they are labelled.
struct ParseNode {
  int word = kNull;
  int tag = kNull;
  int label = kNull;
  int extension = kNull;
  int first = 0;  // inclusive word span
  int last = 0;
  int unary_depth = 0;  // unary links directly below this node
  std::vector<NodePtr> children;

  bool is_leaf() const noexcept { return children.empty(); }
  int child_count() const noexcept { return static_cast<int>(children.size()); }
  int span() const noexcept { return last - first + 1; }
};

struct Sentence {
  std::vector<std::string> surface;
  std::vector<int> word_ids;

  static Sentence from_words(std::span<const std::string> words, const Vocabularies& vocab);
  std::size_t size() const noexcept { return word_ids.size(); }
};

struct Action {
  ModelKind kind = ModelKind::Tag;
  int value = 0;

  friend auto operator<=>(const Action&, const Action&) = default;
};

enum class PendingStatus { AwaitingFeatures, OpenRight, OpenUp, Closed };

// Everything the state machine needs besides the sentence: inventory sizes,
// the unary chain cap and the head table.
struct DerivationRules {
  int tag_count = 0;
  int label_count = 0;
  int max_unary_chain = 4;
  CompiledHeadRules heads;

  static DerivationRules from(const Vocabularies& vocab, const HeadRuleTable& table,
                              int max_unary_chain);
};

struct LegalActions {
  ModelKind kind = ModelKind::Tag;
  std::vector<int> values;  // empty: dead end

  bool dead_end() const noexcept { return values.empty(); }
};

// Bottom-up, left-to-right construction state. The decision node is always
// the leftmost active node with an unset feature; everything to its left is
// an open constituent child (extension right or up) and everything to its
// right is an untagged word. A state is a value: apply() returns a new state
// and shares unchanged nodes with the old one.
class DerivationState {
 public:
  static DerivationState initial(std::shared_ptr<const Sentence> sentence);

  bool complete() const noexcept { return complete_; }
  const Sentence& sentence() const noexcept { return *sentence_; }
  std::span<const NodePtr> active() const noexcept { return active_; }
  std::size_t cursor() const noexcept { return cursor_; }
  const ParseNode& decision_node() const { return *active_.at(cursor_); }
  ModelKind decision_kind() const;
  PendingStatus status(std::size_t active_index) const;

  LegalActions legal_actions(const DerivationRules& rules) const;
  bool is_legal(const DerivationRules& rules, Action action) const;

  /// Throws IllegalAction unless `action` is in legal_actions().
  DerivationState apply(const DerivationRules& rules, Action action) const;
  /// As apply(), for an action already taken from legal_actions().
  DerivationState apply_legal(const DerivationRules& rules, Action action) const;

  /// Tagged leaf at sentence position `pos`, or null if not yet tagged.
  const ParseNode* leaf_at(int pos) const;

  /// The finished tree; requires complete().
  RawTree to_tree(const Vocabularies& vocab) const;
  std::size_t node_count() const;

 private:
  std::shared_ptr<const Sentence> sentence_;
  std::vector<NodePtr> active_;
  std::size_t cursor_ = 0;
  bool complete_ = false;
};

struct DerivationEvent {
  ModelKind kind = ModelKind::Tag;
  std::vector<int> history;
  int future = 0;

  friend bool operator==(const DerivationEvent&, const DerivationEvent&) = default;
};

/// Length of the longest unary chain in `tree`.
int max_unary_chain(const RawTree& tree);

/// The canonical decision sequence for `tree` (post-order: tag or label,
/// then extension, for every node).
std::vector<Action> gold_actions(const RawTree& tree, const Vocabularies& vocab);

/// Replays `actions` from the initial state, validating each one.
DerivationState replay(std::shared_ptr<const Sentence> sentence, std::span<const Action> actions,
                       const DerivationRules& rules);

/// The unique event sequence whose replay reconstructs `tree`.
std::vector<DerivationEvent> encode(const RawTree& tree, const Vocabularies& vocab,
                                    const DerivationRules& rules);

// History slot layout. Nine nodes are queried: current, two to the left,
// two to the right, and the current node's first/second child from each
// side. Each contributes word, tag, label, extension, child count and span.
// The tag model appends the surface words and tags at positions i-1, i-2.
inline constexpr int kQueriedNodes = 9;
inline constexpr int kSlotsPerNode = 6;
inline constexpr int kNodeSlots = kQueriedNodes * kSlotsPerNode;
inline constexpr int kTagExtraSlots = 4;

std::size_t history_size(ModelKind kind) noexcept;
std::span<const SlotType> history_slot_types(ModelKind kind);
std::string history_slot_name(ModelKind kind, std::size_t slot);

/// Fills `out` with the answers to every question slot for `kind`.
/// Label slots use label ids, with rules.label_count standing for a tagged
/// leaf.
void extract_history(const DerivationState& state, const DerivationRules& rules, ModelKind kind,
                     std::vector<int>& out);
std::vector<int> extract_history(const DerivationState& state, const DerivationRules& rules,
                                 ModelKind kind);

/// `kind TAB future TAB slot=value,...` with symbolic values.
std::string format_event(const DerivationEvent& event, const Vocabularies& vocab);

}  // namespace spatter
