#pragma once

#include <stdexcept>
#include <string>

namespace wigest {

enum class ErrorKind {
    Parse,       // malformed input row or token
    Format,      // well-formed rows that violate a file-level rule
    EmptyInput,  // nothing to process
    Domain,      // argument outside an operation's domain
    Io,          // filesystem failure
    Validation,  // scenario script or model consistency failure
    Config,      // template or rule table rejected at load time
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::Format: return "format error";
        case ErrorKind::EmptyInput: return "empty input";
        case ErrorKind::Domain: return "domain error";
        case ErrorKind::Io: return "I/O error";
        case ErrorKind::Validation: return "validation error";
        case ErrorKind::Config: return "config error";
    }
    return "error";
}

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace wigest
