#ifndef DDCA_ERRORS_HPP
#define DDCA_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ddca {

// Invalid configuration (bad population size, malformed weights, bad
// scenario spec). Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid input data (bad signal values, malformed lines, order
// violations). Maps to CLI exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Event arrived out of timestamp order, or an antigen followed a signal
// within the same tick.
class StreamOrderError : public DataError {
public:
    explicit StreamOrderError(const std::string& msg) : DataError(msg) {}
};

// Malformed text input; carries the 1-based line number (0 = unknown).
class ParseError : public DataError {
public:
    ParseError(const std::string& msg, std::size_t line_no)
        : DataError(line_no ? "line " + std::to_string(line_no) + ": " + msg : msg),
          line_no_(line_no) {}

    std::size_t line_no() const { return line_no_; }

private:
    std::size_t line_no_;
};

// A statistic was requested on a series too small to support it.
class InsufficientDataError : public DataError {
public:
    explicit InsufficientDataError(const std::string& msg) : DataError(msg) {}
};

} // namespace ddca

#endif // DDCA_ERRORS_HPP
