#pragma once

#include <stdexcept>
#include <string>

namespace motifrules {

// Base for all precondition and input failures raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or unreadable input data (CSV rows, rule files).
class InputError : public Error {
public:
    using Error::Error;
};

// An argument violates an operation's precondition.
class ArgumentError : public Error {
public:
    using Error::Error;
};

} // namespace motifrules
