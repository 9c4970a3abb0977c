#pragma once

#include <stdexcept>
#include <string>

namespace switchmc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parse failure with 1-based source position.
class ParseError : public Error {
public:
    ParseError(const std::string& message, int line, int column)
        : Error(message + " (line " + std::to_string(line) + ", column " +
                std::to_string(column) + ")"),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

} // namespace switchmc
