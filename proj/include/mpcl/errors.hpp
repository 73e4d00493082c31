#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mpcl {

enum class ErrorCode {
    usage,
    schema,
    budget,
    parameter,
    empty_sample,
    invalid_distribution,
    length_mismatch,
    malformed,
    quantile_sample_depleted,
    rejection_budget_exceeded,
    access_violation,
    io,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure surfaced by the library carries a machine-readable code; the
// CLI prints it as `ERR <code>: <message>`.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) fail(code, message);
}

}  // namespace mpcl
