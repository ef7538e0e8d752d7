#ifndef MFTO_ERRORS_HPP
#define MFTO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mfto {

// Error taxonomy; the CLI maps each family to a distinct exit code.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// q outside the model domain, or degenerate geometry (gimbal-type).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Model produced an inconsistent object (non-SPD mass matrix, etc).
struct ModelConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite value during evaluation.
struct EvaluationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Trajectory left the finite regime mid-integration.
struct BlowUpError : std::runtime_error {
    BlowUpError(const std::string& what, int step) : std::runtime_error(what), step_index(step) {}
    int step_index;
};

struct SpectralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LayoutError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ComparisonError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mfto

#endif
