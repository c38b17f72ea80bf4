#pragma once

#include <stdexcept>
#include <string>

namespace pstomo {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroVector : Error {
    using Error::Error;
};

struct UnsupportedDimension : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct InvalidParams : Error {
    using Error::Error;
};

struct DegenerateDraw : Error {
    using Error::Error;
};

struct LinearlyDependent : Error {
    using Error::Error;
};

struct SubspaceTooSmall : Error {
    using Error::Error;
};

// The canonical-basis outcome pattern has two or more disconnected
// support arcs; phases between arcs cannot be recovered.
struct AmbiguousSupport : Error {
    using Error::Error;
};

struct EnumerationTooLarge : Error {
    using Error::Error;
};

struct SchemaError : Error {
    using Error::Error;
};

struct EmptyInput : Error {
    using Error::Error;
};

}  // namespace pstomo
