#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace proofpad {

/// Stable error identifiers. The string form is part of the CLI and service
/// contract; see docs/protocol.md.
enum class ErrorCode {
  PreconditionViolation,
  ReadOnlyViolation,
  IncompleteForm,
  SpawnFailure,
  StartupTimeout,
  BackendPoisoned,
  BackendCrashed,
  IoError,
  MalformedProofpad,
  MalformedProperty,
  MalformedRequest,
  UnknownKind,
  NoDocument,
  DocumentBusy,
  PortInUse,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PreconditionViolation: return "precondition-violation";
    case ErrorCode::ReadOnlyViolation: return "read-only-violation";
    case ErrorCode::IncompleteForm: return "incomplete-form";
    case ErrorCode::SpawnFailure: return "spawn-failure";
    case ErrorCode::StartupTimeout: return "startup-timeout";
    case ErrorCode::BackendPoisoned: return "backend-poisoned";
    case ErrorCode::BackendCrashed: return "backend-crashed";
    case ErrorCode::IoError: return "io-error";
    case ErrorCode::MalformedProofpad: return "malformed-proofpad";
    case ErrorCode::MalformedProperty: return "malformed-property";
    case ErrorCode::MalformedRequest: return "malformed-request";
    case ErrorCode::UnknownKind: return "unknown-kind";
    case ErrorCode::NoDocument: return "no-document";
    case ErrorCode::DocumentBusy: return "document-busy";
    case ErrorCode::PortInUse: return "port-in-use";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace proofpad
