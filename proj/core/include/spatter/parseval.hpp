#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spatter/corpus.hpp"

namespace spatter {

struct ScoreOptions {
  bool include_root = true;
  bool count_unary_levels = true;  // false collapses identical spans in a unary chain
};

struct SentenceScore {
  std::size_t correct_unlabelled = 0;
  std::size_t correct_labelled = 0;
  std::size_t test_constituents = 0;
  std::size_t gold_constituents = 0;
  std::size_t crossings = 0;
  std::size_t tags_correct = 0;
  std::size_t length = 0;

  double precision() const noexcept;
  double recall() const noexcept;
  double labelled_precision() const noexcept;
  double labelled_recall() const noexcept;
};

struct Constituent {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  std::string label;
  auto operator<=>(const Constituent&) const = default;
};

/// Internal nodes other than pre-terminals, sorted. Throws nothing.
std::vector<Constituent> constituents(const RawTree& tree, const ScoreOptions& options = {});

/// Throws WordMismatch when the leaves differ.
SentenceScore score_pair(const RawTree& gold, const RawTree& test, const ScoreOptions& options = {});

double tagging_accuracy(const RawTree& gold, const RawTree& test);

struct LengthRange {
  std::size_t min = 0;
  std::size_t max = 0;
  std::string name() const { return std::to_string(min) + "-" + std::to_string(max); }
};

std::vector<LengthRange> default_ranges();

/// "4:40,10:20" style. Throws BadConfig.
std::vector<LengthRange> parse_ranges(const std::string& text);

struct RangeReport {
  LengthRange range;
  std::size_t comparisons = 0;
  double avg_length = 0;
  double gold_constituents = 0;
  double test_constituents = 0;
  double tagging_accuracy = 0;
  double crossings_per_sentence = 0;
  double zero_crossings = 0;  // percentages from here on
  double le_one_crossing = 0;
  double le_two_crossings = 0;
  double precision = 0;
  double recall = 0;
  double labelled_precision = 0;
  double labelled_recall = 0;
};

struct Report {
  std::vector<RangeReport> columns;
  std::vector<std::string> warnings;  // ranges with no sentences
};

Report aggregate(std::span<const SentenceScore> scores, std::span<const LengthRange> ranges);

extern const std::vector<std::string> kReportRows;

void write_report_csv(std::ostream& os, const Report& report);
void write_sentence_tsv(std::ostream& os, std::span<const SentenceScore> scores);

/// One row per sentence length: length, crossings, precision, recall, frequency.
void write_length_csv(std::ostream& os, std::span<const SentenceScore> scores);

}  // namespace spatter
