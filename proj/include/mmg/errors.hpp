#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mmg {

// Base class for every error the library throws. Subclasses mirror the
// failure categories of the file formats and numeric operations so callers
// can catch precisely.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed content in an otherwise recognized format. Carries a line
// number when one is known (1-based; 0 means not applicable).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg, std::size_t line = 0)
        : Error(line ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Unrecognized container: wrong magic, unsupported version, wrong image type.
class FormatError : public Error {
public:
    using Error::Error;
};

// Dimension or cardinality mismatch between values that must agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Filesystem-level failure: file missing, unreadable, unwritable.
class IoError : public Error {
public:
    using Error::Error;
};

// A value violates a documented invariant (range, positivity, finiteness).
class ValidationError : public Error {
public:
    using Error::Error;
};

class DuplicateSampleError : public Error {
public:
    using Error::Error;
};

// Class label outside [0, class_count).
class LabelRangeError : public Error {
public:
    using Error::Error;
};

// Probability row sum outside the accepted renormalization band.
class NormalizationError : public Error {
public:
    using Error::Error;
};

// Training loss became non-finite; records the iteration where it happened.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& msg, std::size_t iteration)
        : Error(msg + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}
    std::size_t iteration() const { return iteration_; }

private:
    std::size_t iteration_;
};

// Prediction matrices share no sample ids.
class AlignmentError : public Error {
public:
    using Error::Error;
};

// A modality name was requested that the inputs do not carry.
class KeyError : public Error {
public:
    using Error::Error;
};

// An exhaustive grid would exceed the configured point budget.
class BudgetError : public Error {
public:
    using Error::Error;
};

// Requested error-overlap targets are unachievable for the given accuracies.
class FeasibilityError : public Error {
public:
    using Error::Error;
};

}  // namespace mmg
