#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spatter/classtree.hpp"
#include "spatter/corpus.hpp"
#include "spatter/derivation.hpp"
#include "spatter/dtm.hpp"
#include "spatter/headfinder.hpp"

namespace spatter {

struct TrainConfig {
  GrowConfig grow;
  SmoothConfig smooth;
  std::size_t unk_threshold = Vocabularies::kDefaultUnkThreshold;
  int word_bits = 30;
  int tag_bits = 8;
  int label_bits = 8;
  std::size_t class_window = ClassTree::kDefaultWindow;
  int max_unary_chain = -1;  // -1: longest chain seen in training (4 if none)
  bool renormalize = false;  // rescale scores over the legal candidates
};

// Vocabularies plus the class trees that binarize word, tag, label and
// extension questions. The label tree has one extra item, label_count,
// standing for "this node is a tagged word".
struct ClassSet {
  Vocabularies vocab;
  Schema::ClassTrees trees{};

  const ClassTree& word_tree() const { return *trees[static_cast<std::size_t>(SlotType::Word)]; }
  const ClassTree& tag_tree() const { return *trees[static_cast<std::size_t>(SlotType::Tag)]; }
  const ClassTree& label_tree() const { return *trees[static_cast<std::size_t>(SlotType::Label)]; }
};

BigramCounts word_bigrams(std::span<const RawTree> trees, const Vocabularies& vocab);
BigramCounts tag_bigrams(std::span<const RawTree> trees, const Vocabularies& vocab);
BigramCounts label_bigrams(std::span<const RawTree> trees, const Vocabularies& vocab);

ClassSet build_classes(std::span<const RawTree> trees, const TrainConfig& config);

class ModelSet {
 public:
  static constexpr int kSchemaVersion = 1;

  ModelSet() = default;
  ModelSet(ClassSet classes, HeadRuleTable head_rules, int max_unary_chain,
           std::array<SmoothedModel, kModelKinds> models, TrainConfig config);

  const Vocabularies& vocab() const noexcept { return classes_.vocab; }
  const ClassSet& classes() const noexcept { return classes_; }
  const HeadRuleTable& head_rules() const noexcept { return head_rules_; }
  const DerivationRules& rules() const noexcept { return rules_; }
  const TrainConfig& config() const noexcept { return config_; }
  int max_unary_chain() const noexcept { return rules_.max_unary_chain; }

  const SmoothedModel& model(ModelKind kind) const { return models_[static_cast<std::size_t>(kind)]; }
  const Schema& schema(ModelKind kind) const { return schemas_[static_cast<std::size_t>(kind)]; }

  /// Full distribution over `kind`'s futures for the state's decision.
  std::span<const double> distribution(const DerivationState& state, ModelKind kind,
                                       std::vector<int>& scratch) const;

  /// P(action | state); illegal futures are masked but not renormalized
  /// unless config().renormalize is set. Throws IllegalAction.
  double score_action(const DerivationState& state, Action action) const;

  /// Sum of log decision probabilities along the tree's derivation.
  double derivation_log_prob(const RawTree& tree) const;

  std::shared_ptr<const Sentence> sentence(std::span<const std::string> words) const;

 private:
  ClassSet classes_;
  HeadRuleTable head_rules_;
  DerivationRules rules_;
  std::array<Schema, kModelKinds> schemas_;
  std::array<SmoothedModel, kModelKinds> models_;
  TrainConfig config_;
};

Schema make_schema(ModelKind kind, const Schema::ClassTrees& trees);

struct TrainingReport {
  std::array<std::size_t, kModelKinds> grow_events{};
  std::array<std::size_t, kModelKinds> smooth_events{};
  std::array<SmoothingReport, kModelKinds> smoothing{};
  int max_unary_chain = 0;
};

/// Encodes every tree, routes events to the three models by kind, grows
/// each tree on the grow events and smooths it on the smooth events.
/// `classes` must cover grow and smooth; pass one from build_classes().
ModelSet train(std::span<const RawTree> grow, std::span<const RawTree> smooth,
               const ClassSet& classes, const HeadRuleTable& head_rules,
               const TrainConfig& config = {}, TrainingReport* report = nullptr);

}  // namespace spatter
