#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace visco {

enum class ErrorKind {
    ConstraintViolation,
    GridTooCoarse,
    RootClassificationFailure,
    GapDegenerate,
    NoThreshold,
    SingularSystem,
    AllAmplitudesZero,
    ZeroData,
    NearPole,
    HypothesisViolated,
    NotFoundWithinRange,
    QuadratureNotConverged,
    NotConverged,
    NotPositiveDefinite,
    IllConditioned,
    Config,
    AssertionFailed,
};

std::string_view to_string(ErrorKind kind);

// Process exit code for an error class:
// 2 config, 3 constraint, 4 numerical convergence, 5 conditioning, 1 failed assertion.
int exit_code(ErrorKind kind);

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
    case ErrorKind::ConstraintViolation: return "ConstraintViolation";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::RootClassificationFailure: return "RootClassificationFailure";
    case ErrorKind::GapDegenerate: return "GapDegenerate";
    case ErrorKind::NoThreshold: return "NoThreshold";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::AllAmplitudesZero: return "AllAmplitudesZero";
    case ErrorKind::ZeroData: return "ZeroData";
    case ErrorKind::NearPole: return "NearPole";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::NotFoundWithinRange: return "NotFoundWithinRange";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::AssertionFailed: return "AssertionFailed";
    }
    return "Unknown";
}

inline int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Config:
        return 2;
    case ErrorKind::ConstraintViolation:
    case ErrorKind::HypothesisViolated:
    case ErrorKind::NoThreshold:
    case ErrorKind::GapDegenerate:
    case ErrorKind::GridTooCoarse:
    case ErrorKind::ZeroData:
    case ErrorKind::AllAmplitudesZero:
    case ErrorKind::NearPole:
        return 3;
    case ErrorKind::RootClassificationFailure:
    case ErrorKind::NotFoundWithinRange:
    case ErrorKind::QuadratureNotConverged:
    case ErrorKind::NotConverged:
        return 4;
    case ErrorKind::SingularSystem:
    case ErrorKind::NotPositiveDefinite:
    case ErrorKind::IllConditioned:
        return 5;
    case ErrorKind::AssertionFailed:
        return 1;
    }
    return 1;
}

} // namespace visco
