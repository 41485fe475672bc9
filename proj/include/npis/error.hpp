#pragma once

#include <stdexcept>
#include <string>

namespace npis {

enum class ErrorCode {
    invalid_argument,
    domain,
    dimension_mismatch,
    dimension_unsupported,
    empty_estimate,
    degenerate_proposal,
    trial_failure,
    non_convergence,
    config,
    calibration,
};

const char* to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the engine. The code lets the
/// C API map exceptions to status values without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Stage 1 (NPIS) or the LSIS fit saw no sample with a positive payout.
class TrialFailure : public Error {
public:
    explicit TrialFailure(const std::string& what) : Error(ErrorCode::trial_failure, what) {}
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const char* what) {
    if (!condition) throw Error(code, what);
}

} // namespace npis
