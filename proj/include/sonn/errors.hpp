#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sonn {

/// Caller passed an invalid value or a misconfigured shape.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input data could not be read or is structurally wrong.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

/// Non-numeric token in a text recording. Row numbers are 1-based.
class ParseError : public DataError {
public:
    ParseError(std::size_t row, const std::string& detail);
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

}  // namespace sonn
