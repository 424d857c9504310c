#include "jitvc/error.hpp"

namespace jitvc {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::MalformedPatch: return "MalformedPatch";
    case ErrorCode::DuplicateNodeId: return "DuplicateNodeId";
    case ErrorCode::RepoNotFound: return "RepoNotFound";
    case ErrorCode::BranchNotFound: return "BranchNotFound";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::PathNotFound: return "PathNotFound";
    case ErrorCode::LineOutOfRange: return "LineOutOfRange";
    case ErrorCode::UnknownStrategy: return "UnknownStrategy";
    case ErrorCode::AllZeroWeights: return "AllZeroWeights";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::MinorityTooSmall: return "MinorityTooSmall";
    case ErrorCode::EmptyFeatureSet: return "EmptyFeatureSet";
    case ErrorCode::MissingFeature: return "MissingFeature";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Vcs: return "Vcs";
    }
    return "Unknown";
}

}  // namespace jitvc
