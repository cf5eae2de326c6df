#pragma once

#include <stdexcept>
#include <string>

namespace omnidiff {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct ModalityViolation : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct VocabularyError : Error {
    using Error::Error;
};

struct ShapeError : Error {
    using Error::Error;
};

struct ScheduleError : Error {
    using Error::Error;
};

struct DivergenceError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct EvalError : Error {
    using Error::Error;
};

// Evidence contradicts every sequence in an oracle's support.
struct ZeroProbabilityEvidence : Error {
    using Error::Error;
};

struct EnumerationLimitError : Error {
    using Error::Error;
};

}  // namespace omnidiff
