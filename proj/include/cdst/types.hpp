#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace cdst {

using VertexId = std::int32_t;
using EdgeId = std::int32_t;
using TerminalId = std::int32_t;

inline constexpr VertexId kNoVertex = -1;
inline constexpr EdgeId kNoEdge = -1;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid arguments passed to a generator or algorithm.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Malformed instance or topology file.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A tree or instance violates a structural invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A path search ran out of labels before connecting all terminals.
class ExhaustionError : public Error {
public:
    using Error::Error;
};

/// Instance too large for an exhaustive routine.
class SizeError : public Error {
public:
    using Error::Error;
};

} // namespace cdst
