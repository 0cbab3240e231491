#pragma once

#include <stdexcept>
#include <string>

namespace qpt {

// Every failure mode in the library maps to one of these kinds so tests and
// the CLI can react to the category without parsing message text.
enum class ErrorKind {
  NonSquare,
  NonHermitian,
  DimensionMismatch,
  DimensionTooLarge,
  DimensionTooSmall,
  InvalidSplit,
  NotNormalized,
  NotDensityMatrix,
  NotUnitary,
  OptimizerDidNotConverge,
  OutOfRange,
  SyntaxError,
  UnknownIdentifier,
  ExpressionError,
  NotCyclic,
  IdenticalStates,
  NotParityEigenstates,
  SameParity,
  InsufficientLevels,
  IncompatibleMeasure,
  MixedStateUnsupported,
  ConfigError,
  CacheCorrupt,
  IoError,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qpt
