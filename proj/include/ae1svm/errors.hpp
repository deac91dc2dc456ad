#pragma once

#include <stdexcept>

namespace ae1svm {

// Bad arguments or configuration; CLI exit code 2.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Unreadable or malformed input data; CLI exit code 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Metric preconditions violated (single-class input, missing labels).
class MetricError : public DataError {
public:
    using DataError::DataError;
};

// Numeric failure during training; CLI exit code 4.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// API misuse: stale caches, inconsistent model wiring.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace ae1svm
