#pragma once

#include <stdexcept>
#include <string>

namespace splatgen {

// Error taxonomy shared by every module. The CLI maps these onto exit codes.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input file does not follow the expected layout (missing property, bad header).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Input file is well-formed but carries invalid values (NaN, out of range).
class DataError : public Error {
public:
    using Error::Error;
};

/// Caller violated an operation precondition.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Scene or project configuration is inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Object spawning could not find a non-overlapping placement.
class PlacementError : public Error {
public:
    using Error::Error;
};

} // namespace splatgen
