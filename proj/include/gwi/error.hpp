#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gwi {

enum class ErrorKind {
    InvalidArgument,
    NotSubcritical,
    InvalidTransitionMatrix,
    InsufficientLength,
    DegenerateDenominator,
    DomainError,
    SingularMatrix,
    SeriesDivergence,
    TooManyFailures,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Raised by every library entry point. The kind is stable and is what the
/// CLI maps onto its json error objects.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace gwi
