#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace knotfield {

enum class ErrorKind {
    InvalidParameter,
    DegenerateGeometry,
    Precondition,
    Singularity,
    DegenerateDirection,
    NoInsertion,
    IllConditioned,
    Overstretch,
    NoLoop,
    Structural,
    Parse,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid parameter";
    case ErrorKind::DegenerateGeometry: return "degenerate geometry";
    case ErrorKind::Precondition: return "precondition violated";
    case ErrorKind::Singularity: return "field singularity";
    case ErrorKind::DegenerateDirection: return "degenerate direction";
    case ErrorKind::NoInsertion: return "no insertion";
    case ErrorKind::IllConditioned: return "ill-conditioned";
    case ErrorKind::Overstretch: return "overstretch";
    case ErrorKind::NoLoop: return "no loop";
    case ErrorKind::Structural: return "structural";
    case ErrorKind::Parse: return "parse";
    }
    return "unknown";
}

} // namespace knotfield
