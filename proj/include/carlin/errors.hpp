#pragma once

#include <stdexcept>
#include <string>

namespace carlin {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// The caller handed us something invalid: bad dimensions, out-of-range
// indices, inconsistent run configuration.
class InputError : public Error {
public:
    using Error::Error;
};

// Malformed model file or trajectory CSV.  A parse error is a kind of
// input error so callers may catch either.
class ParseError : public InputError {
public:
    using InputError::InputError;
};

// The request is well-formed but would exceed a configured size cap.
class ResourceError : public Error {
public:
    using Error::Error;
};

// An internal invariant was violated (e.g. the constant block of a lifted
// state drifted away from 1).  Indicates a bug, not bad input.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

// Filesystem trouble: unreadable input, unwritable output.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace carlin
