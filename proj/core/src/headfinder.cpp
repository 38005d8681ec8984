#include "spatter/headfinder.hpp"

#include <sstream>

#include "spatter/corpus.hpp"
#include "spatter/error.hpp"

namespace spatter {

namespace {

std::size_t apply_rule(HeadDirection dir, std::size_t n, auto&& matches_priority,
                       std::size_t priority_count) {
  for (std::size_t p = 0; p < priority_count; ++p) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = dir == HeadDirection::FromLeft ? k : n - 1 - k;
      if (matches_priority(p, i)) return i;
    }
  }
  return dir == HeadDirection::FromLeft ? 0 : n - 1;
}

HeadRule builtin_default() { return HeadRule{"*", HeadDirection::FromRight, {}}; }

}  // namespace

HeadRuleTable::HeadRuleTable() {
  rules_.push_back(builtin_default());
  reindex(nullptr);
}

HeadRuleTable HeadRuleTable::load(std::string_view text, std::vector<std::string>* warnings) {
  HeadRuleTable table;
  table.rules_.clear();
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    HeadRule rule;
    std::string dir;
    if (!(fields >> rule.parent)) continue;
    if (!(fields >> dir))
      throw Error(Errc::BadRuleSyntax, "line " + std::to_string(line_no) + ": missing direction");
    if (dir == "left" || dir == "from-left")
      rule.direction = HeadDirection::FromLeft;
    else if (dir == "right" || dir == "from-right")
      rule.direction = HeadDirection::FromRight;
    else
      throw Error(Errc::BadRuleSyntax,
                  "line " + std::to_string(line_no) + ": bad direction '" + dir + "'");
    for (std::string sym; fields >> sym;) rule.priorities.push_back(sym);
    table.rules_.push_back(std::move(rule));
  }
  table.rules_.push_back(builtin_default());
  table.reindex(warnings);
  return table;
}

void HeadRuleTable::reindex(std::vector<std::string>* warnings) {
  by_parent_.clear();
  // The trailing built-in default is reached through rule_for's fallback.
  for (std::size_t i = 0; i + 1 < rules_.size(); ++i) {
    auto [it, fresh] = by_parent_.try_emplace(rules_[i].parent, i);
    if (!fresh) {
      if (warnings)
        warnings->push_back("head rule for '" + rules_[i].parent + "' shadows an earlier rule");
      it->second = i;
    }
  }
}

const HeadRule& HeadRuleTable::rule_for(std::string_view parent) const {
  if (auto it = by_parent_.find(std::string(parent)); it != by_parent_.end())
    return rules_[it->second];
  if (auto it = by_parent_.find("*"); it != by_parent_.end()) return rules_[it->second];
  return rules_.back();
}

std::size_t HeadRuleTable::head_child(std::string_view parent,
                                      std::span<const std::string> child_labels) const {
  if (child_labels.size() <= 1) return 0;
  const HeadRule& rule = rule_for(parent);
  return apply_rule(
      rule.direction, child_labels.size(),
      [&](std::size_t p, std::size_t i) { return child_labels[i] == rule.priorities[p]; },
      rule.priorities.size());
}

std::string HeadRuleTable::to_text() const {
  std::string out;
  for (std::size_t i = 0; i + 1 < rules_.size(); ++i) {
    const auto& r = rules_[i];
    out += r.parent;
    out += r.direction == HeadDirection::FromLeft ? " left" : " right";
    for (const auto& p : r.priorities) {
      out += ' ';
      out += p;
    }
    out += '\n';
  }
  return out;
}

CompiledHeadRules::CompiledHeadRules(const HeadRuleTable& table, const Vocabularies& vocab)
    : tag_count_(static_cast<int>(vocab.tags.size())),
      rule_of_label_(vocab.labels.size(), -1) {
  auto compile = [&](const HeadRule& r) {
    Rule out;
    out.direction = r.direction;
    for (const auto& sym : r.priorities) {
      std::vector<int> keys;
      if (auto t = vocab.tags.find(sym)) keys.push_back(leaf_key(*t));
      if (auto l = vocab.labels.find(sym)) keys.push_back(node_key(*l));
      out.priorities.push_back(std::move(keys));
    }
    return out;
  };

  default_ = compile(table.rules().back());
  const auto& wildcard = table.rule_for("*");
  if (&wildcard != &table.rules().back()) {
    wildcard_ = static_cast<int>(rules_.size());
    rules_.push_back(compile(wildcard));
  }
  for (std::size_t l = 0; l < vocab.labels.size(); ++l) {
    const auto& r = table.rule_for(vocab.labels.symbol(static_cast<int>(l)));
    if (&r == &table.rules().back() || r.parent == "*") continue;
    rule_of_label_[l] = static_cast<int>(rules_.size());
    rules_.push_back(compile(r));
  }
}

const CompiledHeadRules::Rule& CompiledHeadRules::rule_for(int parent_label) const {
  if (parent_label >= 0 && static_cast<std::size_t>(parent_label) < rule_of_label_.size()) {
    const int r = rule_of_label_[static_cast<std::size_t>(parent_label)];
    if (r >= 0) return rules_[static_cast<std::size_t>(r)];
  }
  if (wildcard_ >= 0) return rules_[static_cast<std::size_t>(wildcard_)];
  return default_;
}

std::size_t CompiledHeadRules::head_child(int parent_label, std::span<const int> child_keys) const {
  if (child_keys.size() <= 1) return 0;
  const Rule& rule = rule_for(parent_label);
  return apply_rule(
      rule.direction, child_keys.size(),
      [&](std::size_t p, std::size_t i) {
        for (int k : rule.priorities[p])
          if (child_keys[i] == k) return true;
        return false;
      },
      rule.priorities.size());
}

}  // namespace spatter
