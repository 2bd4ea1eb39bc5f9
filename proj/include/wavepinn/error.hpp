#pragma once

#include <stdexcept>
#include <string>

namespace wavepinn {

enum class ErrorCategory {
    InvalidArgument,
    Config,
    Shape,
    Geometry,
    Numeric,
    Lookup,
    File,
    Unsupported,
    DegenerateReference,
};

/// Library-wide exception; `category` maps to a CLI exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, const std::string& msg)
        : std::runtime_error(msg), category(cat) {}

    ErrorCategory category;
};

inline const char* to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::InvalidArgument: return "invalid-argument";
        case ErrorCategory::Config: return "config";
        case ErrorCategory::Shape: return "shape";
        case ErrorCategory::Geometry: return "geometry";
        case ErrorCategory::Numeric: return "numeric";
        case ErrorCategory::Lookup: return "lookup";
        case ErrorCategory::File: return "file";
        case ErrorCategory::Unsupported: return "unsupported";
        case ErrorCategory::DegenerateReference: return "degenerate-reference";
    }
    return "unknown";
}

} // namespace wavepinn
