#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace otx {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operand shapes do not line up (vector lengths, matrix dims).
struct DimensionError : Error {
    using Error::Error;
};

// Invalid configuration or argument value.
struct ParamError : Error {
    using Error::Error;
};

// Socket / pipe failure, unexpected EOF.
struct TransportError : Error {
    using Error::Error;
};

// Reason codes carried by MSG_ABORT and session refusals.
enum class AbortReason : uint8_t {
    none = 0,
    check_failed = 1,
    param_mismatch = 2,
    invalid_params = 3,
    version_mismatch = 4,
    malformed_message = 5,
};

inline const char* abort_reason_name(AbortReason r) {
    switch (r) {
        case AbortReason::none: return "none";
        case AbortReason::check_failed: return "check_failed";
        case AbortReason::param_mismatch: return "param_mismatch";
        case AbortReason::invalid_params: return "invalid_params";
        case AbortReason::version_mismatch: return "version_mismatch";
        case AbortReason::malformed_message: return "malformed_message";
    }
    return "unknown";
}

// Peer deviated from the protocol, or a consistency check failed.
struct ProtocolError : Error {
    AbortReason reason;
    explicit ProtocolError(AbortReason r, const std::string& what)
        : Error(what), reason(r) {}
};

}  // namespace otx
