#include "spatter/error.hpp"

namespace spatter {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::UnbalancedBrackets: return "UnbalancedBrackets";
    case Errc::MissingTag: return "MissingTag";
    case Errc::EmptyConstituent: return "EmptyConstituent";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::FractionOutOfRange: return "FractionOutOfRange";
    case Errc::BadRuleSyntax: return "BadRuleSyntax";
    case Errc::IllegalAction: return "IllegalAction";
    case Errc::UnaryChainTooLong: return "UnaryChainTooLong";
    case Errc::NonContiguousTree: return "NonContiguousTree";
    case Errc::UnknownSymbol: return "UnknownSymbol";
    case Errc::EmptyVocabulary: return "EmptyVocabulary";
    case Errc::UnknownId: return "UnknownId";
    case Errc::NoEvents: return "NoEvents";
    case Errc::SlotLayoutMismatch: return "SlotLayoutMismatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::SentenceTooLong: return "SentenceTooLong";
    case Errc::NoParse: return "NoParse";
    case Errc::EnumerationBudgetExceeded: return "EnumerationBudgetExceeded";
    case Errc::WordMismatch: return "WordMismatch";
    case Errc::AlignmentMismatch: return "AlignmentMismatch";
    case Errc::BadModelFile: return "BadModelFile";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::BadConfig: return "BadConfig";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

}  // namespace spatter

#include "spatter/types.hpp"

namespace spatter {

std::string_view model_kind_name(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Tag: return "tag";
    case ModelKind::Extension: return "extension";
    case ModelKind::Label: return "label";
  }
  return "?";
}

std::string_view extension_name(Extension ext) noexcept {
  switch (ext) {
    case Extension::Right: return "right";
    case Extension::Left: return "left";
    case Extension::Up: return "up";
    case Extension::Unary: return "unary";
    case Extension::Root: return "root";
  }
  return "?";
}

std::string_view slot_type_name(SlotType type) noexcept {
  switch (type) {
    case SlotType::Word: return "word";
    case SlotType::Tag: return "tag";
    case SlotType::Label: return "label";
    case SlotType::Extension: return "ext";
    case SlotType::Count: return "count";
  }
  return "?";
}

}  // namespace spatter
