// Error type shared by every vsrl module.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vsrl {

enum class Errc {
  // treebank
  EmptyInput,
  UnbalancedParens,
  EmptyLabel,
  NodeWithBothChildrenAndToken,
  NodeIsRoot,
  NodeNotInTree,
  // corpus
  UnknownSentenceId,
  UnknownRole,
  OverlappingSpans,
  SpanOutOfRange,
  MalformedPropLine,
  // extraction / features
  IndexOutOfRange,
  LengthMismatch,
  SameNode,
  PredicateIsRoot,
  MissingClusterModel,
  UnknownFeatureSet,
  UnknownTemplate,
  // clustering
  InconsistentDimension,
  NonNumericComponent,
  EmptyFile,
  TooFewVectors,
  DegenerateComponent,
  // classifiers
  EmptyData,
  SingleLabelData,
  VersionMismatch,
  CorruptModel,
  InvalidConfig,
  // evaluation
  AlignmentError,
  TooFewInstances,
  SizeExceedsCorpus,
  // io
  IoError,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::UnbalancedParens: return "UnbalancedParens";
    case Errc::EmptyLabel: return "EmptyLabel";
    case Errc::NodeWithBothChildrenAndToken: return "NodeWithBothChildrenAndToken";
    case Errc::NodeIsRoot: return "NodeIsRoot";
    case Errc::NodeNotInTree: return "NodeNotInTree";
    case Errc::UnknownSentenceId: return "UnknownSentenceId";
    case Errc::UnknownRole: return "UnknownRole";
    case Errc::OverlappingSpans: return "OverlappingSpans";
    case Errc::SpanOutOfRange: return "SpanOutOfRange";
    case Errc::MalformedPropLine: return "MalformedPropLine";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::SameNode: return "SameNode";
    case Errc::PredicateIsRoot: return "PredicateIsRoot";
    case Errc::MissingClusterModel: return "MissingClusterModel";
    case Errc::UnknownFeatureSet: return "UnknownFeatureSet";
    case Errc::UnknownTemplate: return "UnknownTemplate";
    case Errc::InconsistentDimension: return "InconsistentDimension";
    case Errc::NonNumericComponent: return "NonNumericComponent";
    case Errc::EmptyFile: return "EmptyFile";
    case Errc::TooFewVectors: return "TooFewVectors";
    case Errc::DegenerateComponent: return "DegenerateComponent";
    case Errc::EmptyData: return "EmptyData";
    case Errc::SingleLabelData: return "SingleLabelData";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::CorruptModel: return "CorruptModel";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::AlignmentError: return "AlignmentError";
    case Errc::TooFewInstances: return "TooFewInstances";
    case Errc::SizeExceedsCorpus: return "SizeExceedsCorpus";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace vsrl
