#include "sonn/errors.hpp"

namespace sonn {

ParseError::ParseError(std::size_t row, const std::string& detail)
    : DataError("parse error at row " + std::to_string(row) + ": " + detail), row_(row) {}

}  // namespace sonn
