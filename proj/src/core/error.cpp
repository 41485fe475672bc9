#include "npis/error.hpp"

namespace npis {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::domain: return "domain";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::dimension_unsupported: return "dimension-unsupported";
    case ErrorCode::empty_estimate: return "empty-estimate";
    case ErrorCode::degenerate_proposal: return "degenerate-proposal";
    case ErrorCode::trial_failure: return "trial-failure";
    case ErrorCode::non_convergence: return "non-convergence";
    case ErrorCode::config: return "config";
    case ErrorCode::calibration: return "calibration";
    }
    return "unknown";
}

} // namespace npis
