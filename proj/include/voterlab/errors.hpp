#pragma once

#include <stdexcept>
#include <string>

namespace voterlab {

// Bad argument or configuration value. The CLI maps this to exit code 2.
class invalid_parameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed input document; carries the 1-based line number.
class parse_error : public std::runtime_error {
public:
    parse_error(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Both acceptance probabilities are zero and the initial state is mixed:
// no transition can ever occur.
class frozen_system_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The requested expectation does not exist (absorption unreachable).
class divergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Problem size exceeds a documented cap.
class resource_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace voterlab
