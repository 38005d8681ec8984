#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spatter/corpus.hpp"
#include "spatter/derivation.hpp"

namespace spatter {

class ModelSet;

struct SearchConfig {
  std::size_t beam_width = 10;         // phase-1 expansions per decision depth
  double switch_threshold = 1e-5;      // completion probability that ends phase 1
  std::size_t max_hypotheses = 2'000'000;
  std::size_t max_length = 40;
};

enum class SearchStatus { Optimal, SearchErrorMemory, NoParse };

std::string_view search_status_name(SearchStatus status) noexcept;

struct SearchResult {
  std::optional<RawTree> tree;
  double logprob = -std::numeric_limits<double>::infinity();
  SearchStatus status = SearchStatus::NoParse;
  std::size_t expanded = 0;
  std::vector<Action> decisions;
};

/// Two-phase search for the most probable derivation. Phase 1 runs a
/// best-first stack decoder (beam-limited per decision depth) until it has a
/// complete parse with probability above the switch threshold, or failing
/// that any complete parse. Phase 2 then exhausts every remaining partial
/// parse breadth-first, dropping those already less probable than the best
/// complete parse. Exceeding max_hypotheses live partial parses stops the
/// search with SearchErrorMemory and the best parse found (completed
/// greedily if none was).
///
/// Throws EmptyInput for no words and SentenceTooLong above max_length.
SearchResult parse(const ModelSet& models, std::span<const std::string> words,
                   const SearchConfig& config = {});

struct EnumerationLimits {
  std::size_t max_states = 50'000'000;
  bool bound_pruning = true;  // skip subtrees already below the best complete parse
};

/// Depth-first enumeration of every legal decision sequence, returning the
/// most probable complete one; ties go to the lexicographically smallest
/// decision sequence. With bound_pruning, subtrees whose prefix is already
/// less probable than the best complete parse are skipped, which cannot
/// change the result since every factor is at most 1.
///
/// Throws EnumerationBudgetExceeded after max_states visited states.
SearchResult exhaustive_parse(const ModelSet& models, std::span<const std::string> words,
                              const EnumerationLimits& limits = {});

}  // namespace spatter
