#pragma once

#include <stdexcept>
#include <string>

namespace aperture {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input documents (pipeline specs, CSV files). Carries a
// location string ("line 3", "byte 118") when one is known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
    ParseError(const std::string& msg, const std::string& where)
        : Error(msg + " (" + where + ")") {}
};

// Contract violations that are detectable before execution: bad operation
// parameters, kind mismatches, unknown columns.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Failures raised while executing an operation on concrete data.
class OpError : public Error {
public:
    explicit OpError(const std::string& msg) : Error(msg) {}
};

} // namespace aperture
