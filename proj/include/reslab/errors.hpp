#pragma once

#include <stdexcept>
#include <string>

namespace reslab {

enum class ErrorCode {
    kMissingFile,
    kBadMagic,
    kBadVersion,
    kTruncated,
    kNonFinite,
    kInvalidMask,
    kIo,
    kShapeMismatch,
    kEmptyMask,
    kInvalidArgument,
    kNoAdmissibleCenter,
    kOutOfBounds,
    kNoPositives,
    kMissingReconstruction,
    kGridMismatch,
    kEmptyInput,
    kConfig,
};

const char* to_string(ErrorCode code);

// Every failure the library reports on bad data or bad arguments. The CLI maps
// kConfig to a usage error and every other code to a data error.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) throw Error(code, message);
}

}  // namespace reslab
