#include "lobtrend/error.hpp"

namespace lobtrend {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::UnknownOrderId: return "UnknownOrderId";
    case Errc::CrossedBookAfterApply: return "CrossedBookAfterApply";
    case Errc::IncompleteRecord: return "IncompleteRecord";
    case Errc::RowCountMismatch: return "RowCountMismatch";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case Errc::UnexpectedRowCount: return "UnexpectedRowCount";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::HorizonOutOfBounds: return "HorizonOutOfBounds";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::DegenerateSeries: return "DegenerateSeries";
    case Errc::InsufficientDays: return "InsufficientDays";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::SeriesTooShort: return "SeriesTooShort";
    case Errc::IncompatibleParams: return "IncompatibleParams";
    case Errc::BadMagic: return "BadMagic";
    case Errc::VersionUnsupported: return "VersionUnsupported";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::MissingHeader: return "MissingHeader";
    case Errc::RowProbabilityInvalid: return "RowProbabilityInvalid";
    case Errc::DuplicateIndex: return "DuplicateIndex";
    case Errc::MisalignedSets: return "MisalignedSets";
    case Errc::EmptyMatrix: return "EmptyMatrix";
    case Errc::NoDeclaredHorizons: return "NoDeclaredHorizons";
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::SignalBarMismatch: return "SignalBarMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
    case Errc::Internal: return "Internal";
  }
  return "Unknown";
}

int exit_code(Errc code) {
  switch (code) {
    case Errc::InvalidArgument:
    case Errc::ConfigError:
    case Errc::IoError:
    case Errc::IncompatibleParams:
    case Errc::InsufficientDays:
      return 1;
    case Errc::Internal:
      return 3;
    default:
      return 2;
  }
}

}  // namespace lobtrend
