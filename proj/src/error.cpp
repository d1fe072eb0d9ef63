#include "gwi/error.hpp"

namespace gwi {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid_argument";
        case ErrorKind::NotSubcritical: return "not_subcritical";
        case ErrorKind::InvalidTransitionMatrix: return "invalid_transition_matrix";
        case ErrorKind::InsufficientLength: return "insufficient_length";
        case ErrorKind::DegenerateDenominator: return "degenerate_denominator";
        case ErrorKind::DomainError: return "domain_error";
        case ErrorKind::SingularMatrix: return "singular_matrix";
        case ErrorKind::SeriesDivergence: return "series_divergence";
        case ErrorKind::TooManyFailures: return "too_many_failures";
    }
    return "unknown";
}

}  // namespace gwi
