#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace screenwise {

/// Stable error categories. The string form is part of the CLI's
/// machine-readable error record and must not change.
enum class ErrorCode {
    Parse,
    DuplicateKey,
    InvalidValue,
    Degenerate,
    NotFound,
    Convergence,
    Separation,
    NotPositiveDefinite,
    Config,
    Io,
    Theory,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::Parse: return "E_PARSE";
    case ErrorCode::DuplicateKey: return "E_DUPLICATE_KEY";
    case ErrorCode::InvalidValue: return "E_INVALID_VALUE";
    case ErrorCode::Degenerate: return "E_DEGENERATE";
    case ErrorCode::NotFound: return "E_NOT_FOUND";
    case ErrorCode::Convergence: return "E_CONVERGENCE";
    case ErrorCode::Separation: return "E_SEPARATION";
    case ErrorCode::NotPositiveDefinite: return "E_NOT_POSITIVE_DEFINITE";
    case ErrorCode::Config: return "E_CONFIG";
    case ErrorCode::Io: return "E_IO";
    case ErrorCode::Theory: return "E_THEORY";
    }
    return "E_UNKNOWN";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised by the rule parser and the delimited-file readers. `position` is a
/// zero-based character offset for rule text and a one-based line number for
/// files.
class ParseError : public Error {
public:
    ParseError(std::size_t position, const std::string& message)
        : Error(ErrorCode::Parse, message), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// An iterative solver gave up. Carries the last iterate and a residual
/// measure so callers can report how far off it was.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& message, std::vector<double> last_iterate,
                     double residual, std::vector<double> trace = {})
        : Error(ErrorCode::Convergence, message),
          last_iterate_(std::move(last_iterate)),
          residual_(residual),
          trace_(std::move(trace)) {}

    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
    double residual() const noexcept { return residual_; }
    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> last_iterate_;
    double residual_;
    std::vector<double> trace_;
};

}  // namespace screenwise
