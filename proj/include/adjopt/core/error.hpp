#pragma once

#include <stdexcept>
#include <string>

namespace adjopt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: mismatched grids, too few samples, bad config values.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// An operation was called on a state that violates its precondition.
class InvalidState : public Error {
public:
    using Error::Error;
};

/// Normal element numerically zero; tangent projection is undefined.
class DegenerateNormal : public Error {
public:
    using Error::Error;
};

/// Finite-difference test direction with (near) zero Riesz pairing.
class DegenerateDirection : public Error {
public:
    using Error::Error;
};

class LineSearchFailure : public Error {
public:
    using Error::Error;
};

/// Solver produced non-finite values or could not continue.
class SolverFailure : public Error {
public:
    using Error::Error;
};

inline void require(bool cond, const std::string& what)
{
    if (!cond) throw InvalidInput(what);
}

} // namespace adjopt
