// Error types shared across the library. InputError covers anything a user
// can cause (bad files, bad parameters); InternalError marks violated
// invariants and maps to a distinct CLI exit code.

#pragma once

#include <stdexcept>
#include <string>

namespace uclock {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error(msg) {}
};

class InternalError : public Error {
public:
    explicit InternalError(const std::string& msg) : Error(msg) {}
};

// Parse failure with a 1-based source line.
class ParseError : public InputError {
public:
    ParseError(const std::string& msg, int line)
        : InputError("line " + std::to_string(line) + ": " + msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

} // namespace uclock
