#pragma once

#include <stdexcept>
#include <string>

namespace comphy {

enum class ErrorKind {
    SingularSeparation,
    AlignmentFailure,
    InconsistentEvidence,
    SearchSpaceExceeded,
    GenerationFailed,
    Unparseable,
    TypeMismatch,
    NonUniqueReference,
    InsufficientEvidence,
    RolloutDiverged,
    NonFiniteLoss,
    Config,
    Data,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI,
/// the corpus runner) can map it to an exit code or a per-question record.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::SingularSeparation: return "singular separation";
        case ErrorKind::AlignmentFailure: return "alignment failure";
        case ErrorKind::InconsistentEvidence: return "inconsistent evidence";
        case ErrorKind::SearchSpaceExceeded: return "search space exceeded";
        case ErrorKind::GenerationFailed: return "generation failed";
        case ErrorKind::Unparseable: return "unparseable";
        case ErrorKind::TypeMismatch: return "type mismatch";
        case ErrorKind::NonUniqueReference: return "non-unique reference";
        case ErrorKind::InsufficientEvidence: return "insufficient evidence";
        case ErrorKind::RolloutDiverged: return "rollout diverged";
        case ErrorKind::NonFiniteLoss: return "non-finite loss";
        case ErrorKind::Config: return "configuration error";
        case ErrorKind::Data: return "data error";
    }
    return "error";
}

}  // namespace comphy
