#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace glyphforge {

// Base of every error the engine raises. Catch this at process boundaries.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Raised when the ink mask of a raster is empty, so there is no bounding box.
class EmptyRaster : public Error {
public:
    EmptyRaster() : Error("raster contains no ink pixels") {}
};

class DimsMismatch : public Error {
public:
    using Error::Error;
};

class InvalidLabel : public Error {
public:
    using Error::Error;
};

class UnknownLabel : public Error {
public:
    explicit UnknownLabel(const std::string& label)
        : Error("unknown label '" + label + "'"), label_(label) {}

    const std::string& label() const noexcept { return label_; }

private:
    std::string label_;
};

// psi / mu with mu == 0.
class UndefinedQuotient : public Error {
public:
    UndefinedQuotient() : Error("recognition quotient undefined: ideal score is zero") {}
};

class TeachLimit : public Error {
public:
    using Error::Error;
};

// Malformed file content. line/column are 1-based; 0 means "not applicable".
class ParseError : public Error {
public:
    ParseError(const std::string& reason, std::size_t line = 0, std::size_t column = 0)
        : Error(format(reason, line, column)), reason_(reason), line_(line), column_(column) {}

    const std::string& reason() const noexcept { return reason_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& reason, std::size_t line, std::size_t column) {
        if (line == 0) return "parse error: " + reason;
        std::string where = "line " + std::to_string(line);
        if (column != 0) where += ", column " + std::to_string(column);
        return "parse error (" + where + "): " + reason;
    }

    std::string reason_;
    std::size_t line_;
    std::size_t column_;
};

// A well-formed file whose weights break |w| <= teach_count or the parity law.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace glyphforge
