#pragma once

#include <stdexcept>
#include <string>

namespace selfpen {

enum class ErrorCode {
    kInvalidArgument = 1,
    kDimensionMismatch = 2,
    kNumericalFailure = 3,
    kIo = 4,
    kParse = 5,
};

// Every failure raised by the library carries one of the codes above so the
// C layer can forward it without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace selfpen
