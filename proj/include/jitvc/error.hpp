#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jitvc {

enum class ErrorCode {
    MalformedPatch,
    DuplicateNodeId,
    RepoNotFound,
    BranchNotFound,
    EmptyHistory,
    PathNotFound,
    LineOutOfRange,
    UnknownStrategy,
    AllZeroWeights,
    TooFewRows,
    SingleClass,
    MinorityTooSmall,
    EmptyFeatureSet,
    MissingFeature,
    EmptyGroup,
    InvalidConfig,
    Io,
    Vcs,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures surface as jitvc::Error; the code is what the CLI
// writes to its machine-readable error log.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace jitvc
