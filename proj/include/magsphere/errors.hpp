#pragma once

#include <stdexcept>
#include <string>

namespace magsphere {

// Chart or projection evaluated at (or too close to) its excluded pole.
struct PoleSingularityError : std::domain_error {
    using std::domain_error::domain_error;
};

// Curve passes too close to a projection pole for stable quadrature.
struct PoleProximityError : std::domain_error {
    using std::domain_error::domain_error;
};

// Loop collapsed to (numerically) a single point.
struct DegenerateCurveError : std::domain_error {
    using std::domain_error::domain_error;
};

// Loop has a vanishing tangent somewhere; unit tangent frame undefined.
struct IrregularCurveError : std::domain_error {
    using std::domain_error::domain_error;
};

// Tangent field handed to an operator whose base loop does not match.
struct InvalidBaseError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Right-hand side violates a required orthogonality/tangency projection.
struct ProjectionViolationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Newton corrector failed to contract.
struct CorrectorDivergenceError : std::runtime_error {
    double last_residual;
    CorrectorDivergenceError(const std::string& what, double res)
        : std::runtime_error(what), last_residual(res) {}
};

// Periodic-orbit shooting failed to close up.
struct ShootingFailureError : std::runtime_error {
    double last_defect;
    ShootingFailureError(const std::string& what, double defect)
        : std::runtime_error(what), last_defect(defect) {}
};

// Cross-validation oracle cannot run on this input.
struct OracleUnavailableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Integrator step size too large for the requested speed.
struct StabilityError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed run configuration or input file.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace magsphere
