#pragma once

#include <stdexcept>
#include <string>

namespace tdepth {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad observation or argument data (non-finite values, dimension mismatch, empty input).
class InputError : public Error {
public:
    using Error::Error;
};

/// Configuration value out of its admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Operation not valid in the object's current state (e.g. snapshot during warm-up).
class StateError : public Error {
public:
    using Error::Error;
};

/// Caller broke a documented precondition (e.g. ray origin outside the envelope).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Statistical model cannot be built (singular or asymmetric covariance).
class ModelError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace tdepth
