#pragma once

#include <stdexcept>
#include <string>

namespace spdefind {

enum class ErrorCode {
    InvalidArgument,
    ConfigParse,
    MissingTruth,
    Io,
    LinearSolveFailure,
    BlowUp,
    UnsupportedOrder,
    NonFinite,
    SingularPrecision,
    TooLarge,
    RankDeficient,
    ZeroTruth,
    NegativeVariance,
};

const char* to_string(ErrorCode code) noexcept;

// Process exit status for the CLI: 2 config, 3 numerical, 4 I/O.
int exit_status(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace spdefind
