#pragma once

#include <stdexcept>
#include <string>

namespace polyattn {

enum class ErrorCode {
    invalid_argument = 1,
    dimension_mismatch = 2,
    io_failure = 3,
    parse_failure = 4,
    overflow = 5,
    certification_failure = 6,
    numeric_failure = 7,
    budget_exceeded = 8,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace polyattn
