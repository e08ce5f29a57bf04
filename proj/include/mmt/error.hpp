#pragma once

#include <stdexcept>
#include <string>

namespace mmt {

/// Classifies every failure the harness can surface. Kinds map one-to-one
/// onto the error conditions named in the file-format and provider contracts,
/// so callers can branch on kind() instead of parsing messages.
enum class ErrorKind {
    Config,
    Io,
    Schema,
    NoEligibleWord,
    NoApplicableToken,
    EmptyInput,
    DanglingBaseId,
    ApplicabilityViolation,
    CuratedOnlyType,
    ShotCountMismatch,
    ContextMissing,
    Network,
    Auth,
    RateLimited,
    ReplayMiss,
    MalformedResponse,
    Storage,
    PairMismatch,
    EmptyGroup,
};

const char* to_string(ErrorKind kind);

class HarnessError : public std::runtime_error {
  public:
    HarnessError(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

}  // namespace mmt
