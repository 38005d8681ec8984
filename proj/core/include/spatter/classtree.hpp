#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace spatter {

// Sparse adjacency counts c(left, right) over item ids.
class BigramCounts {
 public:
  void add(int left, int right, std::uint64_t n = 1) { counts_[{left, right}] += n; }
  const std::map<std::pair<int, int>, std::uint64_t>& entries() const noexcept { return counts_; }
  std::uint64_t total() const noexcept;

 private:
  std::map<std::pair<int, int>, std::uint64_t> counts_;
};

// Binary hierarchical clustering of a vocabulary. Each item's code holds the
// branch taken at depth b in bit b (0 = first child), zero-padded to the bit
// budget, so a k-valued question becomes `budget` binary ones.
class ClassTree {
 public:
  static constexpr std::size_t kDefaultWindow = 1000;

  struct Merge {
    int left = 0;   // tree node ids: items are 0..n-1, merge t creates n+t
    int right = 0;
    double loss = 0.0;  // drop in average mutual information (nats)
  };

  /// Greedy agglomerative clustering that at each step merges the pair of
  /// clusters whose union loses the least average mutual information
  /// between adjacent-item classes. Items enter in descending frequency;
  /// at most `window` clusters are kept active before merging.
  static ClassTree build(std::size_t item_count, const BigramCounts& bigrams, int bit_budget,
                         std::size_t window = kDefaultWindow);

  /// A balanced tree over ids in order.
  static ClassTree balanced(std::size_t item_count, int bit_budget);

  /// Rebuilds a tree from stored codes (as written by codes()/depths()).
  static ClassTree from_codes(std::vector<std::uint64_t> codes, std::vector<int> depths,
                              int bit_budget);

  std::size_t size() const noexcept { return codes_.size(); }
  int budget() const noexcept { return budget_; }
  int depth() const noexcept { return depth_; }
  /// Bits that can differ between items: min(depth, budget).
  int usable_bits() const noexcept { return depth_ < budget_ ? depth_ : budget_; }
  bool truncated() const noexcept { return depth_ > budget_; }
  bool has_collisions() const noexcept { return collisions_; }

  /// Throws UnknownId for ids outside the vocabulary.
  std::uint64_t code(int id) const;
  bool bit(int id, int b) const { return (code(id) >> b) & 1u; }
  int item_depth(int id) const;
  std::string bit_string(int id) const;

  const std::vector<std::uint64_t>& codes() const noexcept { return codes_; }
  const std::vector<int>& depths() const noexcept { return depths_; }
  const std::vector<Merge>& merges() const noexcept { return merges_; }

  /// `id TAB bitstring` lines.
  std::string export_text() const;

  friend bool operator==(const ClassTree& a, const ClassTree& b) {
    return a.budget_ == b.budget_ && a.codes_ == b.codes_ && a.depths_ == b.depths_;
  }

 private:
  void assign_codes(const std::vector<std::pair<int, int>>& children, int root);

  int budget_ = 0;
  int depth_ = 0;
  bool collisions_ = false;
  std::vector<std::uint64_t> codes_;
  std::vector<int> depths_;
  std::vector<Merge> merges_;
};

}  // namespace spatter
