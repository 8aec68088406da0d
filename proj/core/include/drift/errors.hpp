#pragma once

#include <stdexcept>
#include <string>

namespace drift {

// Error taxonomy shared across the pipeline. Each kind maps to one failure
// contract; the CLI translates a subset of kinds into process exit codes.
enum class ErrorKind {
  Schema,            // malformed input record (names field and record index)
  UnknownDataset,
  Parse,             // malformed file (carries byte offset or line number)
  Ordering,          // revision ids regress / duplicate within a page
  MissingHistory,
  Endpoint,          // remote call failed after retries
  Timeout,
  DimensionMismatch,
  NoScorableTitle,
  Domain,            // numeric argument out of range
  Capacity,
  EmptyNeedle,
  TemplateMissing,
  UnknownTitle,
  MissingProbe,
  InsufficientPoints,
  EmptyGroup,
  MissingAdjudication,
  Config,
  StaleInput,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::UnknownDataset: return "UnknownDataset";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Ordering: return "OrderingError";
    case ErrorKind::MissingHistory: return "MissingHistory";
    case ErrorKind::Endpoint: return "EndpointError";
    case ErrorKind::Timeout: return "TimeoutError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NoScorableTitle: return "NoScorableTitle";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::Capacity: return "CapacityError";
    case ErrorKind::EmptyNeedle: return "EmptyNeedle";
    case ErrorKind::TemplateMissing: return "TemplateMissing";
    case ErrorKind::UnknownTitle: return "UnknownTitle";
    case ErrorKind::MissingProbe: return "MissingProbe";
    case ErrorKind::InsufficientPoints: return "InsufficientPoints";
    case ErrorKind::EmptyGroup: return "EmptyGroup";
    case ErrorKind::MissingAdjudication: return "MissingAdjudication";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::StaleInput: return "StaleInput";
    case ErrorKind::Io: return "IOError";
  }
  return "Error";
}

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, std::string(error_kind_name(kind)) + ": " + message);
}

}  // namespace drift
