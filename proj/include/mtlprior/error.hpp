#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mtlprior {

enum class ErrorKind {
  DimensionMismatch,
  NonFiniteEntry,
  NegativeParameter,
  NonPositiveEta,
  InvalidArgument,
  StrongConvexityUnavailable,
  SearchCapExceeded,
  InapplicablePrecondition,
  MissingReference,
  InsufficientSamples,
  UndefinedMetric,
  DegenerateLabels,
  TrainSizeTooLarge,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every library failure is reported through this type; `kind()` lets
/// callers branch without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mtlprior
