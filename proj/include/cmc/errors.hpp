#pragma once
#include <stdexcept>
#include <string>

namespace cmc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct InvalidGraph : Error { using Error::Error; };

struct NonConvergence : Error {
    double best_residual;
    NonConvergence(const std::string& what, double best)
        : Error(what + " (best residual " + std::to_string(best) + ")"), best_residual(best) {}
};
struct InfeasibleBoundary : Error { using Error::Error; };
struct SaddleEscape : Error { using Error::Error; };

struct LayoutInconsistency : Error { using Error::Error; };
struct TangencyViolation : Error { using Error::Error; };
struct DegenerateFace : Error { using Error::Error; };
struct ClosureViolation : Error { using Error::Error; };
struct NotParallel : Error { using Error::Error; };
struct NotPlanar : Error { using Error::Error; };

struct NoRoot : Error { using Error::Error; };
struct NoBracket : Error { using Error::Error; };
struct NonConvergentFamily : Error { using Error::Error; };

}  // namespace cmc
