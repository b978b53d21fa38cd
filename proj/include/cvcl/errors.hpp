#pragma once

#include <stdexcept>
#include <string>

namespace cvcl {

// Invalid configuration supplied by the caller (bad dimensions, bad flags).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse (backward without forward, mismatched call sequence).
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed on-disk data.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

class RowCountMismatchError : public FormatError {
public:
    explicit RowCountMismatchError(const std::string& msg) : FormatError(msg) {}
};

class LabelInconsistencyError : public FormatError {
public:
    explicit LabelInconsistencyError(const std::string& msg) : FormatError(msg) {}
};

class MalformedNumberError : public FormatError {
public:
    explicit MalformedNumberError(const std::string& msg) : FormatError(msg) {}
};

// Non-finite values encountered during numerics.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Synthetic geometry could not be satisfied.
class GenerationError : public std::runtime_error {
public:
    explicit GenerationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cvcl
