#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sqvac {

enum class ErrorKind {
    InvalidDimension,
    TruncationOverflow,
    SymmetryViolation,
    IntegrationFailure,
    NumericalFailure,
    BeyondCritical,
    ResolutionError,
    AlignmentError,
    ConfigError,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidDimension: return "invalid-dimension";
    case ErrorKind::TruncationOverflow: return "truncation-overflow";
    case ErrorKind::SymmetryViolation: return "symmetry-violation";
    case ErrorKind::IntegrationFailure: return "integration-failure";
    case ErrorKind::NumericalFailure: return "numerical-failure";
    case ErrorKind::BeyondCritical: return "beyond-critical";
    case ErrorKind::ResolutionError: return "resolution-error";
    case ErrorKind::AlignmentError: return "alignment-error";
    case ErrorKind::ConfigError: return "config-error";
    }
    return "unknown";
}

/// Every failure raised by the library carries one of the kinds above so the
/// CLI can map it to an exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace sqvac
