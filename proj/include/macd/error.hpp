#ifndef MACD_ERROR_HPP
#define MACD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace macd {

/// Bad inputs, violated preconditions, malformed configs. Maps to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File-format violation; carries the 1-based line number when known.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& path, size_t line, const std::string& msg)
        : ValidationError(path + ":" + std::to_string(line) + ": " + msg), line_(line) {}
    ParseError(const std::string& path, const std::string& msg)
        : ValidationError(path + ": " + msg), line_(0) {}

    size_t line() const { return line_; }

private:
    size_t line_;
};

/// Failure writing or creating outputs. Maps to exit code 3.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite values in numerical routines. Maps to exit code 4.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace macd

#endif
