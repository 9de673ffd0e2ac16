#pragma once

#include <stdexcept>
#include <string>

namespace advact {

// Base class for everything this library throws.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Incompatible matrix shapes (carries both shapes in the message).
struct ShapeError : Error {
    using Error::Error;
};

// Argument outside a function's mathematical domain.
struct DomainError : Error {
    using Error::Error;
};

// Overflow / NaN / Inf detected in a numeric kernel. Carries the label of
// the node or layer where the value was produced.
struct NumericError : Error {
    using Error::Error;
};

// API misuse (non-scalar loss, backward without forward, ...).
struct ContractError : Error {
    using Error::Error;
};

// Malformed input file (CSV, config). Carries a line number where known.
struct ParseError : Error {
    using Error::Error;
};

// Inconsistent experiment or network description.
struct SpecError : Error {
    using Error::Error;
};

} // namespace advact
