#pragma once

#include <stdexcept>
#include <string>

namespace lueq {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NonSquareError : Error {
    explicit NonSquareError(const std::string& what) : Error(what) {}
};

struct NonHermitianError : Error {
    explicit NonHermitianError(const std::string& what) : Error(what) {}
};

struct DimensionMismatchError : Error {
    explicit DimensionMismatchError(const std::string& what) : Error(what) {}
};

/// State validation failure; `kind` names the violated property.
struct ValidationError : Error {
    enum class Kind { NotHermitian, NotUnitTrace, NotPositive, DimensionMismatch, NotNormalized, NotFinite };

    ValidationError(Kind kind, const std::string& what) : Error(what), kind(kind) {}

    Kind kind;
};

/// A trace that must be real came out with a non-negligible imaginary part.
struct ResidualImaginaryError : Error {
    explicit ResidualImaginaryError(const std::string& what) : Error(what) {}
};

struct TooManyOrderingsError : Error {
    TooManyOrderingsError(const std::string& what, std::size_t count, std::size_t cap)
        : Error(what), count(count), cap(cap) {}

    std::size_t count;
    std::size_t cap;
};

struct GenerationFailedError : Error {
    explicit GenerationFailedError(const std::string& what) : Error(what) {}
};

/// Malformed input file (JSON syntax or schema), distinct from state validation.
struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(what) {}
};

}  // namespace lueq
