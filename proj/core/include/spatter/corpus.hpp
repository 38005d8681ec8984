#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace spatter {

// A treebank tree. Leaves carry (word, tag) and no label; internal nodes
// carry a non-terminal label and at least one child.
struct RawTree {
  std::string label;
  std::string word;
  std::string tag;
  std::vector<RawTree> children;

  static RawTree leaf(std::string word, std::string tag);
  static RawTree node(std::string label, std::vector<RawTree> children);

  bool is_leaf() const noexcept { return children.empty(); }
  std::size_t leaf_count() const noexcept;
  std::size_t internal_count() const noexcept;
  std::vector<std::string> words() const;
  std::vector<std::string> tags() const;

  friend bool operator==(const RawTree&, const RawTree&) = default;
};

enum class TreeFormat { UnderscoreSuffix, Penn };

TreeFormat parse_tree_format(std::string_view name);

/// Reads every top-level bracketed expression in `text`.
///
/// UnderscoreSuffix leaves are `word_TAG` tokens (split at the last
/// underscore); Penn leaves are `(TAG word)` pre-terminals. An unlabelled
/// wrapper bracket around a single tree, as in `( (S ...) )`, is dropped.
std::vector<RawTree> parse_treebank(std::string_view text, TreeFormat format);

/// Parses exactly one tree.
RawTree parse_tree(std::string_view text, TreeFormat format);

std::string to_string(const RawTree& tree, TreeFormat format = TreeFormat::UnderscoreSuffix);

class SymbolTable {
 public:
  int intern(std::string_view symbol, std::uint64_t count = 0);
  std::optional<int> find(std::string_view symbol) const;
  const std::string& symbol(int id) const { return symbols_.at(static_cast<std::size_t>(id)); }
  std::uint64_t count(int id) const { return counts_.at(static_cast<std::size_t>(id)); }
  void add_count(int id, std::uint64_t n) { counts_.at(static_cast<std::size_t>(id)) += n; }
  std::size_t size() const noexcept { return symbols_.size(); }
  std::span<const std::string> symbols() const noexcept { return symbols_; }

  friend bool operator==(const SymbolTable& a, const SymbolTable& b) {
    return a.symbols_ == b.symbols_ && a.counts_ == b.counts_;
  }

 private:
  std::vector<std::string> symbols_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, int> index_;
};

struct Vocabularies {
  static constexpr int kUnk = 0;
  static constexpr std::string_view kUnkSymbol = "<unk>";
  static constexpr std::size_t kDefaultUnkThreshold = 3;

  SymbolTable words;   // id 0 is always the UNK class
  SymbolTable tags;
  SymbolTable labels;
  std::size_t unk_threshold = kDefaultUnkThreshold;

  int word_id(std::string_view surface) const;
  int tag_id(std::string_view tag) const;      // throws UnknownSymbol
  int label_id(std::string_view label) const;  // throws UnknownSymbol

  friend bool operator==(const Vocabularies&, const Vocabularies&) = default;
};

/// Words seen fewer than `unk_threshold` times are not entered and map to
/// Vocabularies::kUnk; threshold 0 or 1 keeps every observed word.
Vocabularies build_vocabularies(std::span<const RawTree> trees,
                                std::size_t unk_threshold = Vocabularies::kDefaultUnkThreshold);

struct CorpusSplit {
  std::vector<std::size_t> grow;
  std::vector<std::size_t> smooth;
  bool smooth_empty = false;  // degenerate corpus: nothing left for smoothing
};

/// Seeded random partition of indices [0, count). Both halves are returned
/// in ascending index order.
CorpusSplit split_corpus(std::size_t count, double grow_fraction, std::uint64_t seed);

template <typename T>
std::vector<T> select(std::span<const T> items, std::span<const std::size_t> indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(items[i]);
  return out;
}

}  // namespace spatter
