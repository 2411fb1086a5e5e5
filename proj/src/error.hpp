#pragma once

#include <stdexcept>
#include <string>

namespace qrisk {

/// Error categories surfaced through the C API as status codes.
enum class ErrorCode {
    InvalidArgument = 1,
    ParseError = 2,
    UnsupportedGate = 3,
    RoutingRequired = 4,
    CapacityExceeded = 5,
    DegenerateModel = 6,
    RejectedSwap = 7,
    VersionMismatch = 8,
    UndefinedCorrelation = 9,
    IoError = 10,
    Internal = 11,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace qrisk
