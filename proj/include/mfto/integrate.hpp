#ifndef MFTO_INTEGRATE_HPP
#define MFTO_INTEGRATE_HPP

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mfto/model.hpp"

namespace mfto {

enum class Scheme { explicit_euler, rk4 };

inline std::string scheme_name(Scheme s) { return s == Scheme::rk4 ? "rk4" : "explicit-euler"; }
inline Scheme scheme_from_name(const std::string& s) {
    if (s == "rk4") return Scheme::rk4;
    if (s == "explicit-euler" || s == "euler") return Scheme::explicit_euler;
    throw ConfigError("unknown integration scheme: " + s);
}

struct IntegratorSpec {
    Scheme scheme = Scheme::explicit_euler;
    int steps = 10;
    double T = 0.0;  // total integration time; may be negative (backward flow)

    double dt() const { return T / steps; }
};

// Phase-space vector field on the flattened state (q_0..q_{d-1}, p_0..p_{d-1}).
using PhaseField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Approximates the time-T flow map. After every step, periodic coordinates
// are wrapped and reflecting coordinates are folded back with a sign flip of
// the conjugate momentum; truncated coordinates are left alone. Throws
// BlowUpError (with the step index) on a non-finite state.
PhaseState flow(const PhaseField& field, const PhaseState& z0, const IntegratorSpec& spec,
                std::span<const CoordinateDomain> domain);

PhaseState flow(const HamiltonianModel& model, const PhaseState& z0, const IntegratorSpec& spec);

// In-place boundary folding shared by flow() and the samplers.
void apply_boundaries(Eigen::VectorXd& q, Eigen::VectorXd& p, std::span<const CoordinateDomain> domain);

}  // namespace mfto

#endif
