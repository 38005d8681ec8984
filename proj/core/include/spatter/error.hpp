#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spatter {

enum class Errc {
  UnbalancedBrackets,
  MissingTag,
  EmptyConstituent,
  EmptyCorpus,
  FractionOutOfRange,
  BadRuleSyntax,
  IllegalAction,
  UnaryChainTooLong,
  NonContiguousTree,
  UnknownSymbol,
  EmptyVocabulary,
  UnknownId,
  NoEvents,
  SlotLayoutMismatch,
  EmptyInput,
  SentenceTooLong,
  NoParse,
  EnumerationBudgetExceeded,
  WordMismatch,
  AlignmentMismatch,
  BadModelFile,
  VersionMismatch,
  ChecksumMismatch,
  BadConfig,
  Io,
};

std::string_view errc_name(Errc code) noexcept;

// All library failures are reported through this one exception type; the
// code distinguishes the cases callers are expected to handle.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace spatter
