#pragma once

#include <stdexcept>
#include <string>

namespace ksample {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Two vectors fed to a kernel do not share a dimension.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// A matrix operand does not match the layout it is combined with.
class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

// Malformed CSV input (bad cell, wrong arity). Message carries the line number.
class ParseError : public Error {
public:
    using Error::Error;
};

// A sample violates a structural invariant (too few groups, undersized group,
// mixed dimensions, non-finite coordinate).
class ValidationError : public Error {
public:
    using Error::Error;
};

// The normalization factor collapsed below the degeneracy threshold; the
// statistic is undefined (division by ~0). Happens e.g. when every
// observation is identical.
class DegenerateKernelMatrix : public Error {
public:
    using Error::Error;
};

// A factorization that is positive definite by construction failed anyway;
// signals NaN leakage or corrupt input.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

// The reference solver hit a singular system. Impossible for gamma > 0
// unless the input is corrupt.
class SingularSystem : public Error {
public:
    using Error::Error;
};

class InvalidAlpha : public Error {
public:
    using Error::Error;
};

class InvalidParameters : public Error {
public:
    using Error::Error;
};

} // namespace ksample
