#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spatter/classtree.hpp"
#include "spatter/types.hpp"

namespace spatter {

enum class QuestionKind : std::uint8_t { IsNull = 0, Bit = 1, Threshold = 2 };

// A binary question about one history slot: "is it NULL?", "is bit b of its
// class code set?" or "is it <= t?". Non-null questions answer no on NULL.
struct Question {
  std::uint16_t slot = 0;
  QuestionKind kind = QuestionKind::IsNull;
  std::int32_t param = 0;

  friend auto operator<=>(const Question&, const Question&) = default;
};

// Typed slot layout of a history vector plus the class trees that binarize
// its categorical slots.
class Schema {
 public:
  using ClassTrees = std::array<std::shared_ptr<const ClassTree>, kCategoricalSlotTypes>;

  static const std::vector<int>& default_thresholds();

  Schema() = default;
  Schema(std::vector<SlotType> slots, ClassTrees trees,
         std::vector<int> thresholds = default_thresholds());

  std::size_t slot_count() const noexcept { return slots_.size(); }
  SlotType slot_type(std::size_t slot) const { return slots_.at(slot); }
  const ClassTree* tree(SlotType type) const;
  const std::vector<int>& thresholds() const noexcept { return thresholds_; }

  bool answer(const Question& q, std::span<const int> history) const;

  /// Every askable question, ordered by (slot, kind, param).
  std::vector<Question> questions() const;
  /// Questions for one slot only, in the same order.
  std::vector<Question> questions_for(std::size_t slot) const;

 private:
  std::vector<SlotType> slots_;
  ClassTrees trees_{};
  std::vector<int> thresholds_;
};

// Flat storage for (history, future) training events of one model.
class EventSet {
 public:
  explicit EventSet(std::size_t slot_count = 0) : slots_(slot_count) {}

  void add(std::span<const int> history, int future);
  std::size_t size() const noexcept { return futures_.size(); }
  bool empty() const noexcept { return futures_.empty(); }
  std::size_t slot_count() const noexcept { return slots_; }
  std::span<const int> history(std::size_t i) const {
    return {data_.data() + i * slots_, slots_};
  }
  int future(std::size_t i) const { return futures_[i]; }

 private:
  std::size_t slots_;
  std::vector<int> data_;
  std::vector<int> futures_;
};

struct GrowConfig {
  std::size_t min_events = 8;
  double min_gain = 0.01;  // bits
  int max_depth = 24;
};

struct DTNode {
  bool is_leaf = true;
  Question question{};
  int yes = -1;
  int no = -1;
  int parent = -1;
  int depth = 0;
  std::uint64_t total = 0;
  std::vector<std::uint64_t> counts;  // future-value counts from growing data
  double gain = 0.0;                  // information gain of the split (bits)
};

class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<DTNode> nodes, std::size_t future_count, std::size_t slot_count);

  /// CART-style growing: each node takes the question with the largest
  /// reduction in future entropy; ties go to the lowest (slot, kind, param).
  static DecisionTree grow(const EventSet& events, const Schema& schema, std::size_t future_count,
                           const GrowConfig& config = {});

  /// Asks `order` in sequence on every path, skipping a question only where
  /// it does not split the events reaching that node.
  static DecisionTree forced_order(const EventSet& events, const Schema& schema,
                                   std::span<const Question> order, std::size_t future_count);

  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t future_count() const noexcept { return future_count_; }
  std::size_t slot_count() const noexcept { return slot_count_; }
  const DTNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const std::vector<DTNode>& nodes() const noexcept { return nodes_; }
  std::size_t leaf_count() const;

  int leaf_for(const Schema& schema, std::span<const int> history) const;
  std::vector<double> empirical(int id) const;

  using SlotNamer = std::function<std::string(std::size_t)>;
  /// Pre-order `node_id question|LEAF lambda_bucket sparse-counts` lines.
  std::string dump(const SlotNamer& namer = {}) const;

 private:
  std::vector<DTNode> nodes_;
  std::size_t future_count_ = 0;
  std::size_t slot_count_ = 0;
};

struct SmoothConfig {
  int max_iterations = 100;
  double tolerance = 1e-6;    // relative heldout log-likelihood change
  double lambda_max = 0.999;  // keeps every smoothed distribution strictly positive
};

struct SmoothingReport {
  bool used_heldout = false;
  int iterations = 0;
  std::vector<double> log_likelihood;  // heldout LL before each M-step, then final
};

inline int lambda_bucket(std::uint64_t count) {
  int b = 0;
  while (count > 1) {
    count >>= 1;
    ++b;
  }
  return b;
}

// A grown tree whose node distributions are interpolated along the
// root-to-node path: P(f|n) = l(n) Pemp(f|n) + (1 - l(n)) P(f|parent(n)),
// with the uniform distribution as the root's parent. Weights are shared by
// nodes whose growing count has the same floor(log2).
class SmoothedModel {
 public:
  SmoothedModel() = default;

  /// Estimates bucket weights by EM on `heldout`. An empty heldout set falls
  /// back to a fixed schedule and reports used_heldout = false.
  static SmoothedModel smooth(DecisionTree tree, const EventSet& heldout, const Schema& schema,
                              const SmoothConfig& config = {}, SmoothingReport* report = nullptr);

  /// Uses the given per-bucket weights as they are (any value in [0, 1]).
  static SmoothedModel with_lambdas(DecisionTree tree, std::vector<double> bucket_lambdas);

  static std::vector<double> fixed_schedule(std::size_t buckets, double lambda_max);

  /// Smoothed distribution at the leaf `history` reaches. Throws
  /// SlotLayoutMismatch if the history has the wrong arity.
  std::span<const double> predict(const Schema& schema, std::span<const int> history) const;
  std::span<const double> distribution(int node) const;

  double log_likelihood(const Schema& schema, const EventSet& events) const;

  const DecisionTree& tree() const noexcept { return tree_; }
  const std::vector<double>& lambdas() const noexcept { return lambdas_; }
  int bucket_of(int node) const { return lambda_bucket(tree_.node(node).total); }
  std::size_t future_count() const noexcept { return tree_.future_count(); }

  std::string dump(const DecisionTree::SlotNamer& namer = {}) const;

 private:
  void recompute();

  DecisionTree tree_;
  std::vector<double> lambdas_;
  std::vector<double> smoothed_;  // node-major, future_count per node
};

std::size_t bucket_count(const DecisionTree& tree);

}  // namespace spatter
