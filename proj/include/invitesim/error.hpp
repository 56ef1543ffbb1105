#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace invitesim {

enum class ErrorCode {
    StabilityViolation,
    NonPositiveRate,
    NonIntegerGamma,
    RepeatedEigenvalue,
    HorizonZero,
    ThinningBoundViolated,
    DriverMismatch,
    InvalidInitial,
    NegativeInitialX,
    NonSymmetricV0,
    GridOutsideHorizon,
    InsufficientData,
    ConfigInvalid,
    OutputDirUnwritable,
    UnknownPreset,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for all contract violations; `code()` identifies the failure.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace invitesim
