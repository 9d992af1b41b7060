#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace polyscan {

// Input text could not be parsed. line/column are 1-based; 0 means "not
// applicable" (e.g. a whole-file problem).
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, std::int64_t line = 0, std::int64_t column = 0)
        : std::runtime_error(std::move(message)), line_(line), column_(column) {}

    std::int64_t line() const noexcept { return line_; }
    std::int64_t column() const noexcept { return column_; }

private:
    std::int64_t line_;
    std::int64_t column_;
};

// A matrix expected to be symmetric positive definite failed its Cholesky
// factorization. pivot() is the 0-based index of the offending diagonal.
class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(std::string message, int pivot)
        : std::runtime_error(std::move(message)), pivot_(pivot) {}

    int pivot() const noexcept { return pivot_; }

private:
    int pivot_;
};

// No usable observations (every individual missing or excluded).
class EmptyDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Sample ids in two inputs have no usable overlap or mismatched lengths.
class AlignmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A file could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace polyscan
