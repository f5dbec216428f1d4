#pragma once

#include <stdexcept>
#include <string>

namespace merimm {

/// Failure categories; the CLI maps them onto distinct exit codes.
enum class ErrorKind {
    input,         // malformed or out-of-range arguments
    precondition,  // mathematically invalid request (e.g. not an immersion)
    numerical,     // iteration, refinement or degree budget exhausted
    internal       // two independent routes disagreed
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error input_error(const std::string& what) { return {ErrorKind::input, what}; }
inline Error precondition_error(const std::string& what) { return {ErrorKind::precondition, what}; }
inline Error numerical_error(const std::string& what) { return {ErrorKind::numerical, what}; }
inline Error internal_error(const std::string& what) { return {ErrorKind::internal, what}; }

}  // namespace merimm
