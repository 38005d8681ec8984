#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace spatter {

struct Vocabularies;

enum class HeadDirection { FromLeft, FromRight };

struct HeadRule {
  std::string parent;  // a label, or "*" for any label without its own rule
  HeadDirection direction = HeadDirection::FromRight;
  std::vector<std::string> priorities;

  friend bool operator==(const HeadRule&, const HeadRule&) = default;
};

// Deterministic head-child lookup keyed on the parent label and the labels
// (tags, for leaves) of the children.
//
// Rule text, one rule per line:
//
//   PARENT direction child1 child2 ...
//
// where direction is `left` or `right` (the end the search starts from).
// For each listed child symbol in turn, children are scanned in the rule's
// direction and the first match is the head. With no match the first child
// in that direction is the head. `#` starts a comment. A built-in
// `* right` rule is always appended and catches everything else.
class HeadRuleTable {
 public:
  HeadRuleTable();

  static HeadRuleTable load(std::string_view text, std::vector<std::string>* warnings = nullptr);

  std::size_t head_child(std::string_view parent, std::span<const std::string> child_labels) const;

  /// Number of rules including the built-in default.
  std::size_t size() const noexcept { return rules_.size(); }
  const std::vector<HeadRule>& rules() const noexcept { return rules_; }
  const HeadRule& rule_for(std::string_view parent) const;

  std::string to_text() const;

  friend bool operator==(const HeadRuleTable& a, const HeadRuleTable& b) {
    return a.rules_ == b.rules_;
  }

 private:
  void reindex(std::vector<std::string>* warnings);

  std::vector<HeadRule> rules_;  // last entry is the built-in default
  std::unordered_map<std::string, std::size_t> by_parent_;
};

// Integer form of a HeadRuleTable for one set of vocabularies. Child keys
// are tag ids for leaves and (tag count + label id) for internal nodes.
class CompiledHeadRules {
 public:
  CompiledHeadRules() = default;
  CompiledHeadRules(const HeadRuleTable& table, const Vocabularies& vocab);

  int leaf_key(int tag) const noexcept { return tag; }
  int node_key(int label) const noexcept { return tag_count_ + label; }

  std::size_t head_child(int parent_label, std::span<const int> child_keys) const;

 private:
  struct Rule {
    HeadDirection direction = HeadDirection::FromRight;
    std::vector<std::vector<int>> priorities;  // keys matching each listed symbol
  };
  const Rule& rule_for(int parent_label) const;

  int tag_count_ = 0;
  std::vector<Rule> rules_;
  std::vector<int> rule_of_label_;  // -1 = fall through to wildcard/default
  int wildcard_ = -1;
  Rule default_;
};

}  // namespace spatter
