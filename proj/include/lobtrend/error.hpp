#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lobtrend {

enum class Errc {
  // book
  UnknownOrderId,
  CrossedBookAfterApply,
  IncompleteRecord,
  // ingest
  RowCountMismatch,
  MalformedRow,
  NonMonotonicTimestamp,
  UnexpectedRowCount,
  LabelOutOfRange,
  // labeling
  HorizonOutOfBounds,
  EmptyInput,
  DegenerateSeries,
  // dataset
  InsufficientDays,
  ZeroVariance,
  SeriesTooShort,
  IncompatibleParams,
  BadMagic,
  VersionUnsupported,
  TruncatedPayload,
  ChecksumMismatch,
  // predictor
  DimensionMismatch,
  NonFiniteLoss,
  MissingHeader,
  RowProbabilityInvalid,
  DuplicateIndex,
  // ensemble / metrics
  MisalignedSets,
  EmptyMatrix,
  NoDeclaredHorizons,
  // backtest
  EmptySeries,
  SignalBarMismatch,
  // generic
  InvalidArgument,
  ConfigError,
  IoError,
  Internal,
};

std::string_view to_string(Errc code);

/// Process exit code for an error: 1 user/config, 2 data, 3 internal invariant.
int exit_code(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace lobtrend
