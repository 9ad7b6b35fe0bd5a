#pragma once

#include <stdexcept>
#include <string>

namespace repdyn {

// Failure categories. The CLI maps these one-to-one onto exit codes.
enum class ErrorKind {
    config = 2,
    io = 3,
    missing_input = 4,
    numeric = 5,
    invalid_argument = 6,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) {
        fail(ErrorKind::invalid_argument, what);
    }
}

}  // namespace repdyn
