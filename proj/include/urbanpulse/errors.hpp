#pragma once

#include <stdexcept>
#include <string>

namespace urbanpulse {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates a documented precondition.
class InputError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration (bad parameter, missing key, impossible window).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A whole input file is unusable (missing or wrong header).
class FormatError : public Error {
public:
    using Error::Error;
};

/// A cell or index lies outside its container.
class BoundsError : public Error {
public:
    using Error::Error;
};

/// Dataset cannot support the requested computation (too short, degenerate).
class DataError : public Error {
public:
    using Error::Error;
};

/// Linear-algebra failure.
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularSystemError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace urbanpulse
