#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace taskshare {

enum class Errc {
    MalformedSoc,
    UnknownMajorGroup,
    DuplicateConflict,
    MissingColumn,
    EmptyFile,
    FileNotFound,
    MalformedInput,
    NonPositiveWage,
    DuplicateKey,
    NegativeValue,
    ZeroTotalEmployment,
    UnresolvableKey,
    InvalidArgument,
    SeriesTooShort,
    ConvergenceFailure,
    ModelRejected,
    NoValidPoints,
    ConsistencyViolation,
    Internal,
};

[[nodiscard]] constexpr std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::MalformedSoc: return "MALFORMED_SOC";
        case Errc::UnknownMajorGroup: return "UNKNOWN_MAJOR_GROUP";
        case Errc::DuplicateConflict: return "DUPLICATE_CONFLICT";
        case Errc::MissingColumn: return "MISSING_COLUMN";
        case Errc::EmptyFile: return "EMPTY_FILE";
        case Errc::FileNotFound: return "FILE_NOT_FOUND";
        case Errc::MalformedInput: return "MALFORMED_INPUT";
        case Errc::NonPositiveWage: return "NON_POSITIVE_WAGE";
        case Errc::DuplicateKey: return "DUPLICATE_KEY";
        case Errc::NegativeValue: return "NEGATIVE_VALUE";
        case Errc::ZeroTotalEmployment: return "ZERO_TOTAL_EMPLOYMENT";
        case Errc::UnresolvableKey: return "UNRESOLVABLE_KEY";
        case Errc::InvalidArgument: return "INVALID_ARGUMENT";
        case Errc::SeriesTooShort: return "SERIES_TOO_SHORT";
        case Errc::ConvergenceFailure: return "CONVERGENCE_FAILURE";
        case Errc::ModelRejected: return "MODEL_REJECTED";
        case Errc::NoValidPoints: return "NO_VALID_POINTS";
        case Errc::ConsistencyViolation: return "CONSISTENCY_VIOLATION";
        case Errc::Internal: return "INTERNAL";
    }
    return "INTERNAL";
}

/// Problems caused by the caller's data or configuration (CLI exit code 2).
[[nodiscard]] constexpr bool is_input_error(Errc code) noexcept {
    switch (code) {
        case Errc::ConvergenceFailure:
        case Errc::ModelRejected:
        case Errc::ConsistencyViolation:
        case Errc::Internal:
            return false;
        default:
            return true;
    }
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace taskshare
